#include "multibd/io.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace multibd {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& out, const TransitionMatrix& m) {
  out << "a,b,prob\n";
  for (int a = m.a_min(); a <= m.a_max(); ++a) {
    for (int b = 0; b <= m.B(); ++b) out << a << ',' << b << ',' << format_double(m(a, b)) << '\n';
  }
}

nlohmann::json matrix_json(const TransitionMatrix& m, bool with_timing) {
  nlohmann::json j;
  j["a_min"] = m.a_min();
  j["a_max"] = m.a_max();
  j["B"] = m.B();
  j["tail_mass"] = m.tail_mass();
  j["total_mass"] = m.total_mass();
  j["warnings"] = m.warnings;
  j["grid_terms"] = m.stats.grid_terms;
  j["inversion_converged"] = m.stats.inversion_converged;
  j["inversion_last_change"] = m.stats.last_change;
  j["max_cf_iterations"] = m.stats.max_cf_iterations;
  if (with_timing) j["seconds"] = m.stats.seconds;
  return j;
}

void write_empirical_csv(std::ostream& out, const EmpiricalMatrix& m, double z) {
  out << "a,b,prob,count,ci_low,ci_high\n";
  for (const auto& [s, c] : m.counts()) {
    const auto [lo, hi] = m.ci(s.a, s.b, z);
    out << s.a << ',' << s.b << ',' << format_double(m.prob(s.a, s.b)) << ',' << c << ','
        << format_double(lo) << ',' << format_double(hi) << '\n';
  }
}

void write_chain_csv(std::ostream& out, const McmcChain& chain, int n_total) {
  out << "iter,log_alpha,log_beta,alpha,beta,r0,log_target\n";
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    const auto& d = chain.draws[i];
    const double alpha = std::exp(d[0]), beta = std::exp(d[1]);
    out << i << ',' << format_double(d[0]) << ',' << format_double(d[1]) << ','
        << format_double(alpha) << ',' << format_double(beta) << ','
        << format_double(beta * n_total / alpha) << ',' << format_double(chain.log_target[i])
        << '\n';
  }
}

nlohmann::json summary_json(const PosteriorSummary& s) {
  auto row = [](const char* name, const ParamSummary& p) {
    return nlohmann::json{{"param", name}, {"mean", p.mean}, {"q025", p.q025}, {"q975", p.q975}};
  };
  return nlohmann::json::array({row("alpha", s.alpha), row("beta", s.beta), row("R0", s.r0)});
}

namespace {

RateFn column(std::shared_ptr<const RateTable> t, int k) {
  return [t, k](int a, int b) {
    const auto it = t->rows.find({a, b});
    return it == t->rows.end() ? 0.0 : it->second[k];
  };
}

}  // namespace

BBDRates RateTable::bbd() const {
  if (death_first) throw std::invalid_argument("rate table lists mu1; use it as death/birth-death");
  auto t = std::make_shared<const RateTable>(*this);
  return BBDRates(column(t, 0), column(t, 1), column(t, 2), column(t, 3));
}

DBDRates RateTable::dbd() const {
  if (!death_first) throw std::invalid_argument("rate table lists lambda1; use it as birth/birth-death");
  auto t = std::make_shared<const RateTable>(*this);
  return DBDRates(column(t, 0), column(t, 1), column(t, 2), column(t, 3));
}

RateTable read_rate_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open rate table " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  RateTable table;
  if (line == "a,b,lambda1,lambda2,mu2,gamma") {
    table.death_first = false;
  } else if (line == "a,b,mu1,lambda2,mu2,gamma") {
    table.death_first = true;
  } else {
    throw std::invalid_argument(path +
                                ": header must be a,b,lambda1,lambda2,mu2,gamma or "
                                "a,b,mu1,lambda2,mu2,gamma");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    int a, b;
    std::array<double, 4> r;
    std::string rest;
    if (!(ss >> a >> b >> r[0] >> r[1] >> r[2] >> r[3]) || (ss >> rest)) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 6 fields");
    }
    if (a < 0 || b < 0) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": negative state");
    for (double v : r) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": rates must be finite and >= 0");
      }
    }
    if (!table.rows.emplace(std::pair{a, b}, r).second) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": duplicate state");
    }
  }
  return table;
}

}  // namespace multibd
