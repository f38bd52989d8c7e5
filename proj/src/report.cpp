#include "graphnls/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "graphnls/version.hpp"

namespace graphnls {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // '\n' endings on every platform
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

void write_header(std::ofstream& out, const nlohmann::json& config) {
  out << "# graphnls " << GRAPHNLS_VERSION << "\n";
  out << "# config " << config.dump() << "\n";
}

} // namespace

void write_field_csv(const std::string& path, const nlohmann::json& config,
                     const TwoComponentState& state) {
  auto out = open_out(path);
  write_header(out, config);
  out << "edge,x,re_u,im_u,re_v,im_v\n";
  const StarGraph& g = state.graph();
  for (int e = 0; e < g.num_edges; ++e)
    for (int i = 0; i < g.points_per_edge; ++i) {
      const Complex u = state.u.values()(i, e);
      const Complex v = state.v.values()(i, e);
      out << (e + 1) << ',' << format_number(g.coordinate(i)) << ',' << format_number(u.real())
          << ',' << format_number(u.imag()) << ',' << format_number(v.real()) << ','
          << format_number(v.imag()) << "\n";
    }
}

TwoComponentState read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read field CSV " + path);
  std::string line;
  struct Row {
    int edge;
    double x, re_u, im_u, re_v, im_v;
  };
  std::vector<Row> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("edge,", 0) != 0)
        throw ValidationError("malformed field CSV: missing column header");
      header_seen = true;
      continue;
    }
    Row r{};
    char comma;
    std::istringstream ss(line);
    if (!(ss >> r.edge >> comma >> r.x >> comma >> r.re_u >> comma >> r.im_u >> comma >>
          r.re_v >> comma >> r.im_v))
      throw ValidationError("malformed field CSV row: " + line);
    rows.push_back(r);
  }
  if (rows.empty()) throw ValidationError("field CSV has no data rows");

  int num_edges = 0;
  for (const auto& r : rows) num_edges = std::max(num_edges, r.edge);
  if (rows.size() % num_edges != 0)
    throw ValidationError("field CSV rows do not form a uniform grid");
  const int m = static_cast<int>(rows.size()) / num_edges;
  double length = 0.0;
  for (const auto& r : rows) length = std::max(length, r.x);
  const StarGraph graph = make_graph(num_edges, length, m);

  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(m, num_edges);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(m, num_edges);
  std::vector<int> fill(num_edges, 0);
  for (const auto& r : rows) {
    const int e = r.edge - 1;
    if (e < 0 || e >= num_edges || fill[e] >= m)
      throw ValidationError("field CSV rows out of order");
    u(fill[e], e) = Complex(r.re_u, r.im_u);
    v(fill[e], e) = Complex(r.re_v, r.im_v);
    ++fill[e];
  }
  return TwoComponentState{GridField(graph, std::move(u)), GridField(graph, std::move(v))};
}

void write_spectrum_csv(const std::string& path, const nlohmann::json& config,
                        const SpectrumReport& report) {
  auto out = open_out(path);
  write_header(out, config);
  out << "index,eigenvalue,classification\n";
  for (size_t i = 0; i < report.eigenvalues.size(); ++i) {
    const double lam = report.eigenvalues[i];
    const char* cls = lam < -report.zero_tol ? "neg" : (lam <= report.zero_tol ? "ker" : "pos");
    out << i << ',' << format_number(lam) << ',' << cls << "\n";
  }
}

void write_trace_csv(const std::string& path, const nlohmann::json& config,
                     const EvolutionTrace& trace) {
  auto out = open_out(path);
  write_header(out, config);
  out << "t,mass_u,mass_v,energy,q1,orbital_dev\n";
  for (size_t i = 0; i < trace.times.size(); ++i)
    out << format_number(trace.times[i]) << ',' << format_number(trace.mass_u[i]) << ','
        << format_number(trace.mass_v[i]) << ',' << format_number(trace.energy[i]) << ','
        << format_number(trace.q1[i]) << ',' << format_number(trace.orbital_dev[i]) << "\n";
}

void write_iteration_csv(const std::string& path, const nlohmann::json& config,
                         const std::vector<IterationRecord>& trace) {
  auto out = open_out(path);
  write_header(out, config);
  out << "iter,energy,grad_norm\n";
  for (const auto& rec : trace)
    out << rec.iter << ',' << format_number(rec.energy) << ',' << format_number(rec.grad_norm)
        << "\n";
}

void write_json(const std::string& path, const nlohmann::json& config, nlohmann::json body) {
  auto out = open_out(path);
  body["version"] = GRAPHNLS_VERSION;
  body["config"] = config;
  out << body.dump(2) << "\n";
}

} // namespace graphnls
