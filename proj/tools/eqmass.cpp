// Command-line front end: sequence generation, partition construction and
// verification, Wasserstein bound reports, the grid bottleneck oracle, and
// the 1-D obstruction table.
//
// Exit codes: 0 success, 2 invalid flags, 3 internal verification failure,
// 4 parse failure, 5 check failure, 6 oracle budget exceeded.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqmass/partition.hpp"
#include "eqmass/rational.hpp"
#include "eqmass/sequence.hpp"
#include "eqmass/serialize.hpp"
#include "eqmass/transport.hpp"

namespace {

using namespace eqmass;

constexpr int kExitFlags = 2;
constexpr int kExitInternalVerify = 3;
constexpr int kExitParse = 4;
constexpr int kExitCheck = 5;
constexpr int kExitBudget = 6;

std::string fmt_float(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

struct TableRow {
  std::string N, value, lower, upper, oracle, error;
};

void emit_table(const std::vector<TableRow>& rows, const std::string& format,
                std::ostream& out) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"N", r.N},
                     {"value", r.value},
                     {"lower", r.lower},
                     {"upper", r.upper},
                     {"oracle", r.oracle},
                     {"error", r.error}});
    out << arr.dump(1) << "\n";
    return;
  }
  out << "N,value,lower,upper,oracle,error\n";
  for (const auto& r : rows)
    out << r.N << ',' << r.value << ',' << r.lower << ',' << r.upper << ','
        << r.oracle << ',' << r.error << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

double theorem_bound(std::uint64_t N, int d) {
  return 6.0 * std::sqrt(static_cast<double>(d)) *
         std::pow(static_cast<double>(N), -1.0 / d);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equal-mass transport partitions and Wasserstein bounds"};
  app.require_subcommand(1);

  int d = 2;
  std::uint64_t n = 0, n_max = 0, grid = 0;
  double pnorm = 2.0;
  std::string out_path, in_path, format = "csv";
  double constant = 6.0;
  bool oblivious = false;

  auto add_common = [&](CLI::App* cmd, bool needs_d) {
    if (needs_d) cmd->add_option("--d", d, "dimension (>= 2)");
    cmd->add_option("--out", out_path, "output file (default stdout)");
    cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* cmd_gen = app.add_subcommand("gen", "emit the first N sequence points");
  cmd_gen->add_option("--n", n, "prefix length")->required();
  add_common(cmd_gen, true);

  CLI::App* cmd_partition =
      app.add_subcommand("partition", "build, verify and serialize a partition");
  cmd_partition->add_option("--n", n, "prefix length")->required();
  add_common(cmd_partition, true);

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "re-verify a serialized partition");
  cmd_verify->add_option("input", in_path, "partition file")->required();
  cmd_verify->add_flag("--oblivious", oblivious,
                       "force pairwise disjointness checks");
  cmd_verify->add_option("--constant", constant,
                         "radius constant c (Theorem constant is 6)");

  CLI::App* cmd_bounds =
      app.add_subcommand("bounds", "certificate, theorem bound and lower bound");
  cmd_bounds->add_option("--n", n, "prefix length")->required();
  cmd_bounds->add_option("--p", pnorm, "Wasserstein order (recorded only)");
  add_common(cmd_bounds, true);

  CLI::App* cmd_oracle =
      app.add_subcommand("oracle", "bounds plus the grid bottleneck oracle");
  cmd_oracle->add_option("--n", n, "prefix length")->required();
  cmd_oracle->add_option("--grid", grid, "grid resolution per axis")->required();
  add_common(cmd_oracle, true);

  CLI::App* cmd_obstruction =
      app.add_subcommand("obstruction", "1-D obstruction table (N * W_1)");
  cmd_obstruction->add_option("--n-max", n_max, "largest prefix length")
      ->required();
  add_common(cmd_obstruction, false);

  CLI::App* cmd_rates =
      app.add_subcommand("rates", "N^(1/d)-normalized certificate sweep");
  cmd_rates->add_option("--n-max", n_max, "sweep bound")->required();
  add_common(cmd_rates, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFlags;
  }

  std::ofstream file_out;
  std::ostream* os = &std::cout;
  try {
    if (!out_path.empty()) {
      file_out = open_out(out_path);
      os = &file_out;
    }

    if (*cmd_gen) {
      if (d < 2 || n < 1) {
        std::cerr << "gen: requires --d >= 2 and --n >= 1\n";
        return kExitFlags;
      }
      auto pts = sequence::prefix(n, d);
      *os << "n";
      for (int j = 1; j <= d; ++j) *os << ",x" << j;
      for (int j = 1; j <= d; ++j) *os << ",x" << j << "_float";
      *os << "\n";
      for (const auto& p : pts) {
        *os << p.n;
        for (const auto& c : p.coords) *os << ',' << to_string(c);
        for (const auto& c : p.coords) *os << ',' << fmt_float(to_double(c));
        *os << "\n";
      }
      return 0;
    }

    if (*cmd_partition) {
      if (d < 2 || n < 1) {
        std::cerr << "partition: requires --d >= 2 and --n >= 1\n";
        return kExitFlags;
      }
      auto part = partition::build_partition(n, d);
      auto rep = partition::verify_partition(part);
      if (!rep.ok()) {
        for (const auto& c : rep.checks)
          if (!c.pass)
            std::cerr << "internal check failed: " << c.name << ": "
                      << c.witness << "\n";
        return kExitInternalVerify;
      }
      *os << serialize::serialize_partition(part) << "\n";
      return 0;
    }

    if (*cmd_verify) {
      std::ifstream in(in_path);
      if (!in) {
        std::cerr << "verify: cannot read " << in_path << "\n";
        return kExitFlags;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      partition::TransportPartition part;
      std::vector<std::vector<BigRational>> stored;
      try {
        part = serialize::parse_partition(buf.str(), &stored);
      } catch (const serialize::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
      }
      const bool use_oblivious = oblivious || part.N <= 2000;
      BigRational c_num;
      // --constant is a convenience float; small integral values stay exact
      if (constant == std::floor(constant))
        c_num = BigRational(static_cast<std::int64_t>(constant));
      else
        c_num = BigRational(static_cast<std::int64_t>(constant * 1000000), 1000000);
      auto rep = partition::verify_partition(part, use_oblivious, c_num);
      rep.checks.push_back(serialize::check_stored_points(part, stored));
      bool ok = true;
      for (const auto& c : rep.checks) {
        std::cout << c.name << ": " << (c.pass ? "pass" : "FAIL " + c.witness)
                  << "\n";
        ok = ok && c.pass;
      }
      return ok ? 0 : kExitCheck;
    }

    if (*cmd_bounds || *cmd_oracle) {
      if (d < 2 || n < 1 || pnorm < 1.0) {
        std::cerr << "requires --d >= 2, --n >= 1, --p >= 1\n";
        return kExitFlags;
      }
      auto part = partition::build_partition(n, d);
      auto cert = transport::winfty_upper(part);
      TableRow row;
      row.N = std::to_string(n);
      row.value = fmt_float(cert.radius);
      row.lower = fmt_float(transport::volumetric_lower_winfty(n, d));
      row.upper = fmt_float(theorem_bound(n, d));
      if (*cmd_oracle) {
        std::vector<std::vector<BigRational>> pts;
        for (const auto& p : sequence::prefix(n, d)) pts.push_back(p.coords);
        try {
          auto orc = transport::winfty_oracle_grid(pts, grid);
          row.oracle = fmt_float(orc.value);
          row.error = fmt_float(orc.error);
        } catch (const transport::OracleBudgetExceeded& e) {
          std::cerr << "oracle: " << e.what() << "\n";
          return kExitBudget;
        }
      }
      emit_table({row}, format, *os);
      return 0;
    }

    if (*cmd_obstruction) {
      if (n_max < 2) {
        std::cerr << "obstruction: requires --n-max >= 2\n";
        return kExitFlags;
      }
      auto rows = transport::obstruction_scan(n_max);
      std::vector<TableRow> table;
      table.reserve(rows.size());
      for (const auto& r : rows) {
        TableRow t;
        t.N = std::to_string(r.N);
        t.value = to_string(r.n_times_w1);
        t.upper = to_string(r.block_max);  // running max within the block
        table.push_back(std::move(t));
      }
      emit_table(table, format, *os);
      return 0;
    }

    if (*cmd_rates) {
      if (d < 2 || n_max < 1) {
        std::cerr << "rates: requires --d >= 2 and --n-max >= 1\n";
        return kExitFlags;
      }
      std::vector<TableRow> table;
      const double root_d = std::sqrt(static_cast<double>(d));
      for (std::uint64_t N = std::uint64_t{1} << d; N <= n_max; N <<= d) {
        auto part = partition::build_partition(N, d);
        auto cert = transport::winfty_upper(part);
        const double scale = std::pow(static_cast<double>(N), 1.0 / d);
        TableRow row;
        row.N = std::to_string(N);
        row.value = fmt_float(cert.radius * scale);
        row.lower = fmt_float(transport::volumetric_lower_winfty(N, d) * scale);
        row.upper = fmt_float(6.0 * root_d);
        table.push_back(std::move(row));
      }
      emit_table(table, format, *os);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitFlags;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
