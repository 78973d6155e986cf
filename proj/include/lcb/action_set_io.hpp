#pragma once

// Text records for action sets. A record is a header line
//   points <weight> <rows> <d>     followed by rows of d numbers, or
//   hrep <weight> <rows> <d>       followed by rows of d normal entries and an offset.
// An optional "round <t>" line before a record tags it (context logs).
// Numbers are written with 17 significant digits, so reading back is exact.

#include "lcb/action_set.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lcb {

struct ActionSetRecord {
  ActionSet set;
  double weight = 1.0;
  std::optional<long long> round;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_action_set(std::ostream& os, const ActionSet& s, double weight = 1.0,
                             std::optional<long long> round = std::nullopt) {
  if (round) os << "round " << *round << '\n';
  if (s.is_hrep()) {
    const RowMatrix& n = s.normals();
    os << "hrep " << format_double(weight) << ' ' << n.rows() << ' ' << n.cols() << '\n';
    for (Eigen::Index i = 0; i < n.rows(); ++i) {
      for (Eigen::Index j = 0; j < n.cols(); ++j) os << format_double(n(i, j)) << ' ';
      os << format_double(s.offsets()[i]) << '\n';
    }
    return;
  }
  const RowMatrix& p = s.points();
  os << "points " << format_double(weight) << ' ' << p.rows() << ' ' << p.cols() << '\n';
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) os << (j ? " " : "") << format_double(p(i, j));
    os << '\n';
  }
}

inline std::vector<ActionSetRecord> read_action_sets(std::istream& is) {
  std::vector<ActionSetRecord> out;
  std::string line;
  std::optional<long long> pending_round;
  long long lineno = 0;
  auto fail = [&](const std::string& what) {
    throw DomainError("action set record, line " + std::to_string(lineno) + ": " + what);
  };
  auto next_data_line = [&](std::string& l) {
    while (std::getline(is, l)) {
      ++lineno;
      const auto hash = l.find('#');
      if (hash != std::string::npos) l.erase(hash);
      if (l.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  while (next_data_line(line)) {
    std::istringstream hs(line);
    std::string kind;
    hs >> kind;
    if (kind == "round") {
      long long t;
      if (!(hs >> t)) fail("bad round tag");
      pending_round = t;
      continue;
    }
    if (kind != "points" && kind != "hrep") fail("unknown record kind '" + kind + "'");
    double w;
    long long rows, d;
    if (!(hs >> w >> rows >> d) || rows < 1 || d < 1) fail("bad record header");
    const long long cols = kind == "hrep" ? d + 1 : d;
    RowMatrix m(rows, cols);
    for (long long i = 0; i < rows; ++i) {
      if (!next_data_line(line)) fail("record ended early");
      std::istringstream rs(line);
      for (long long j = 0; j < cols; ++j) {
        std::string tok;
        if (!(rs >> tok)) fail("row has too few entries");
        try {
          std::size_t used = 0;
          m(i, j) = std::stod(tok, &used);
          if (used != tok.size()) fail("bad number '" + tok + "'");
        } catch (const std::logic_error&) {
          fail("bad number '" + tok + "'");
        }
      }
      std::string extra;
      if (rs >> extra) fail("row has too many entries");
    }
    ActionSetRecord r{kind == "hrep" ? ActionSet::halfspaces(m.leftCols(d), m.col(d))
                                     : ActionSet::finite(m),
                      w, pending_round};
    pending_round.reset();
    out.push_back(std::move(r));
  }
  if (pending_round) fail("round tag without a record");
  return out;
}

inline std::vector<ActionSetRecord> read_action_sets_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open " + path);
  return read_action_sets(f);
}

}  // namespace lcb
