#include "dppmix/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dppmix/errors.hpp"
#include "dppmix/model.hpp"

namespace dppmix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double field_number(const std::string& text, const std::string& where) {
  try {
    return parse_double(text);
  } catch (const std::exception&) {
    throw DataError(where + ": '" + text + "' is not a number");
  }
}

long field_integer(const std::string& text, const std::string& where) {
  const double v = field_number(text, where);
  if (v != static_cast<double>(static_cast<long>(v))) throw DataError(where + ": '" + text + "' is not an integer");
  return static_cast<long>(v);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw DataError("column '" + name + "' not found");
}

Table read_csv(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    t.columns = split_fields(line);
    break;
  }
  if (t.columns.empty()) throw DataError(source + ": missing header row");
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != t.columns.size()) {
      throw DataError(where + ": expected " + std::to_string(t.columns.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(field_number(f, where));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_csv(in, path.string());
}

Dataset load_dataset(const DataSpec& spec) {
  const Table t = read_csv(spec.file);
  const int iy = t.column(spec.response);
  std::vector<int> ix;
  for (const auto& name : spec.covariates) ix.push_back(t.column(name));
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(ix.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double y = t.rows[i][static_cast<std::size_t>(iy)] * spec.scale;
    if (!std::isfinite(y)) throw DataError("non-finite response in row " + std::to_string(i + 1));
    d.y.push_back(y);
    for (std::size_t j = 0; j < ix.size(); ++j) {
      const double v = t.rows[i][static_cast<std::size_t>(ix[j])];
      if (!std::isfinite(v)) throw DataError("non-finite covariate in row " + std::to_string(i + 1));
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return d;
}

void write_trace(const Trace& trace, std::ostream& out, std::ostream& labels_out) {
  const bool cov = trace.kind == ModelKind::Covariates;
  const int p = cov && !trace.cov_states.empty() ? static_cast<int>(trace.cov_states.front().gamma.front().size()) : 0;
  out << "# dppmix trace " << kTraceFormatVersion << "\n";
  out << "# model " << (cov ? "cov" : "nocov") << "\n";
  out << "# n_items " << trace.n_items << "\n";
  out << "# p " << p << "\n";
  out << "# truncation " << trace.truncation << "\n";
  out << "# window";
  for (const auto& iv : trace.window) out << " " << format_double(iv.lo) << " " << format_double(iv.hi);
  out << "\n";
  for (const auto& [name, stats] : trace.moves) {
    out << "# move " << name << " " << stats.accepted << " " << stats.attempted << "\n";
  }
  out << "sample,iteration,k,component,";
  if (cov) {
    out << "mu,sigma2,rho,nu,rho_scale";
    for (int j = 1; j <= p; ++j) out << ",gamma_" << j;
    for (int j = 1; j <= p; ++j) out << ",beta_" << j;
  } else {
    out << "w,mu,sigma2,rho,nu,rho_scale";
  }
  out << "\n";

  labels_out << "sample,iteration";
  for (int i = 1; i <= trace.n_items; ++i) labels_out << ",item_" << i;
  labels_out << "\n";

  for (std::size_t s = 0; s < trace.size(); ++s) {
    const int k = trace.k_at(s);
    const std::string prefix = std::to_string(s) + "," + std::to_string(trace.iterations[s]) + "," + std::to_string(k) + ",";
    const std::string scale = format_double(trace.rho_scales[s]);
    for (int c = 0; c < k; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      out << prefix << (c + 1) << ",";
      if (cov) {
        const auto& st = trace.cov_states[s];
        out << format_double(st.mu[cu]) << "," << format_double(st.sigma2[cu]) << "," << format_double(st.rho) << ","
            << format_double(st.nu) << "," << scale;
        for (int j = 0; j < p; ++j) out << "," << format_double(st.gamma[cu](j));
        for (int j = 0; j < p; ++j) out << "," << format_double(st.beta[cu](j));
      } else {
        const auto& st = trace.states[s];
        out << format_double(st.w[cu]) << "," << format_double(st.mu[cu]) << "," << format_double(st.sigma2[cu]) << ","
            << format_double(st.rho) << "," << format_double(st.nu) << "," << scale;
      }
      out << "\n";
    }
    labels_out << s << "," << trace.iterations[s];
    for (int l : trace.labels_at(s)) labels_out << "," << (l + 1);
    labels_out << "\n";
  }
}

void write_trace(const Trace& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto out = open_output(dir / "trace.csv");
  auto labels = open_output(dir / "labels.csv");
  write_trace(trace, out, labels);
}

namespace {

struct TraceHeader {
  int version = -1;
  ModelKind kind = ModelKind::NoCovariates;
  int n_items = -1;
  int p = 0;
};

void parse_header_line(const std::string& line, TraceHeader& h, Trace& trace) {
  std::istringstream ss(line.substr(1));
  std::string key;
  ss >> key;
  if (key == "dppmix") {
    std::string word;
    ss >> word >> h.version;
    if (word != "trace") throw DataError("not a trace file");
  } else if (key == "model") {
    std::string kind;
    ss >> kind;
    if (kind == "nocov") h.kind = ModelKind::NoCovariates;
    else if (kind == "cov") h.kind = ModelKind::Covariates;
    else throw DataError("unknown model '" + kind + "' in trace");
  } else if (key == "n_items") {
    ss >> h.n_items;
  } else if (key == "p") {
    ss >> h.p;
  } else if (key == "truncation") {
    ss >> trace.truncation;
  } else if (key == "window") {
    std::string lo, hi;
    trace.window.clear();
    while (ss >> lo >> hi) trace.window.push_back({field_number(lo, "trace window"), field_number(hi, "trace window")});
  } else if (key == "move") {
    std::string name;
    MoveStats stats;
    ss >> name >> stats.accepted >> stats.attempted;
    trace.moves[name] = stats;
  }
  if (ss.fail() && !ss.eof()) throw DataError("malformed trace header line '" + line + "'");
}

}  // namespace

Trace read_trace(std::istream& in, std::istream& labels_in) {
  Trace trace;
  TraceHeader h;
  std::string line;
  std::string columns;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      parse_header_line(line, h, trace);
      continue;
    }
    columns = line;
    break;
  }
  if (h.version < 0) throw DataError("trace file has no version header");
  if (h.version != kTraceFormatVersion) {
    throw DataError("trace format version " + std::to_string(h.version) + " is not supported (expected " +
                    std::to_string(kTraceFormatVersion) + ")");
  }
  if (h.n_items < 0) throw DataError("trace file has no n_items header");
  trace.kind = h.kind;
  trace.n_items = h.n_items;
  const bool cov = h.kind == ModelKind::Covariates;
  const std::size_t n_fields = cov ? 9 + 2 * static_cast<std::size_t>(h.p) : 10;
  if (split_fields(columns).size() != n_fields) throw DataError("trace column header does not match the model");

  std::string label_line;
  std::getline(labels_in, label_line);
  if (split_fields(label_line).size() != 2 + static_cast<std::size_t>(h.n_items)) {
    throw DataError("labels header does not match n_items");
  }

  long line_no = 1;
  bool pending = static_cast<bool>(std::getline(in, line));
  while (pending && trim(line).empty()) pending = static_cast<bool>(std::getline(in, line));
  while (pending) {
    // one block of k rows per kept sample
    auto fields = split_fields(line);
    const std::string where = "trace line " + std::to_string(++line_no);
    if (fields.size() != n_fields) throw DataError(where + ": wrong field count");
    const long sample = field_integer(fields[0], where);
    const long iteration = field_integer(fields[1], where);
    const long k = field_integer(fields[2], where);
    if (sample != static_cast<long>(trace.size())) throw DataError(where + ": samples out of order");
    if (k < 1) throw DataError(where + ": k must be positive");
    MixtureState st;
    CovMixtureState cst;
    for (long c = 0; c < k; ++c) {
      if (c > 0) {
        if (!std::getline(in, line)) throw DataError("trace ends inside sample " + std::to_string(sample));
        fields = split_fields(line);
        if (fields.size() != n_fields) throw DataError("trace line " + std::to_string(++line_no) + ": wrong field count");
        if (field_integer(fields[0], where) != sample || field_integer(fields[2], where) != k) {
          throw DataError("trace sample " + std::to_string(sample) + " has the wrong number of rows");
        }
      }
      if (field_integer(fields[3], where) != c + 1) throw DataError(where + ": components out of order");
      if (cov) {
        cst.mu.push_back(field_number(fields[4], where));
        cst.sigma2.push_back(field_number(fields[5], where));
        cst.rho = field_number(fields[6], where);
        cst.nu = field_number(fields[7], where);
        Eigen::VectorXd g(h.p), b(h.p);
        for (int j = 0; j < h.p; ++j) {
          g(j) = field_number(fields[9 + static_cast<std::size_t>(j)], where);
          b(j) = field_number(fields[9 + static_cast<std::size_t>(h.p + j)], where);
        }
        cst.gamma.push_back(g);
        cst.beta.push_back(b);
      } else {
        st.w.push_back(field_number(fields[4], where));
        st.mu.push_back(field_number(fields[5], where));
        st.sigma2.push_back(field_number(fields[6], where));
        st.rho = field_number(fields[7], where);
        st.nu = field_number(fields[8], where);
      }
    }
    const double rho_scale = field_number(fields[cov ? 8 : 9], where);

    if (!std::getline(labels_in, label_line)) throw DataError("labels file ends before sample " + std::to_string(sample));
    const auto lf = split_fields(label_line);
    if (lf.size() != 2 + static_cast<std::size_t>(h.n_items) || field_integer(lf[0], "labels") != sample ||
        field_integer(lf[1], "labels") != iteration) {
      throw DataError("labels row does not match trace sample " + std::to_string(sample));
    }
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(h.n_items));
    for (std::size_t i = 2; i < lf.size(); ++i) {
      const long l = field_integer(lf[i], "labels");
      if (l < 1 || l > k) throw DataError("label out of range in sample " + std::to_string(sample));
      labels.push_back(static_cast<int>(l - 1));
    }
    if (cov) {
      cst.labels = std::move(labels);
      trace.record(iteration, cst, rho_scale);
    } else {
      st.labels = std::move(labels);
      trace.record(iteration, st, rho_scale);
    }
    pending = static_cast<bool>(std::getline(in, line));
    while (pending && trim(line).empty()) pending = static_cast<bool>(std::getline(in, line));
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& dir) {
  const auto trace_path = dir / "trace.csv";
  const auto labels_path = dir / "labels.csv";
  if (!std::filesystem::exists(trace_path)) throw DataError("missing trace file '" + trace_path.string() + "'");
  if (!std::filesystem::exists(labels_path)) throw DataError("missing labels file '" + labels_path.string() + "'");
  auto in = open_input(trace_path);
  auto labels = open_input(labels_path);
  return read_trace(in, labels);
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed line '" + line + "'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = open_output(path);
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dppmix
