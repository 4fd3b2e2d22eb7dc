#include <cmath>
#include <fstream>
#include <ostream>
#include <system_error>

#include "format.hpp"
#include "tvkey/explorer.hpp"

namespace tvkey {

using detail::format_double;
using detail::format_offset;
using detail::format_sci;

namespace {

constexpr const char* kNa = "NA";

std::string rounded(double value) { return std::to_string(std::llround(value)); }

class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  }
  std::ostream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::Io, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  CsvFile file(path);
  writer(file.stream());
  file.close();
}

}  // namespace

void write_table1_csv(const Report& report, std::ostream& out) {
  out << "delta_vt,n,m,t,cells,cell_area_um2,decoder_area_um2,total_area_um2,criterion_percentile,p_rskey\n";
  for (const DesignRecord& row : report.rows) {
    out << format_offset(row.delta_vt_mv) << ',';
    if (!row.code) {
      out << kNa << ',' << kNa << ',' << kNa << ',' << kNa << ',' << kNa << ',' << kNa << ',' << kNa << ',' << kNa
          << ',' << kNa << '\n';
      continue;
    }
    out << row.code->n << ',' << row.code->m << ',' << row.code->t << ',' << row.cells << ','
        << rounded(row.cell_area_um2) << ',';
    if (row.decoder_area_known) {
      out << format_double(row.decoder_area_um2) << ',' << rounded(row.total_area_um2) << ',';
    } else {
      out << kNa << ',' << kNa << ',';
    }
    out << (row.distribution.samples.empty() ? std::string(kNa) : format_sci(row.criterion_percentile)) << ',';
    out << (row.attacks.empty() ? std::string(kNa) : format_sci(row.attacks.front().p_rskey)) << '\n';
  }
}

void write_tradeoff_csv(std::span<const TradeoffRow> rows, std::ostream& out) {
  out << "t,first_percentile_key_failure,attacker_success\n";
  for (const TradeoffRow& row : rows) {
    out << row.t << ',' << format_sci(row.first_percentile_key_failure) << ',' << format_sci(row.attacker_success)
        << '\n';
  }
}

void write_summary(const Report& report, std::ostream& out) {
  const FlowConfig& config = report.config;
  out << "tvkey " << kVersion << " design flow report\n";
  out << "seed: " << config.seed << '\n';
  out << "sigma_var_mv: " << format_double(config.sigma_var_mv) << '\n';
  out << "sigma_noise_mv: " << format_double(report.sigma_noise_mv)
      << (report.calibration ? " (calibrated)" : " (configured)") << '\n';
  if (report.calibration) {
    out << "calibration: " << report.calibration->matches << " of " << report.calibration->targets
        << " reference pairings matched\n";
  }
  out << "key_bits: " << config.key_bits << '\n';
  out << "criterion: " << format_double(config.criterion.chip_quantile) << " of chips below "
      << format_sci(config.criterion.max_key_failure, 2) << '\n';
  out << "population: " << config.cells << " cells x " << config.trials << " trials; " << config.chips
      << " chips per distribution\n";
  if (config.majority_votes > 1) out << "majority_votes: " << config.majority_votes << '\n';
  out << "decoder areas: provided constants\n\n";

  for (const DesignRecord& row : report.rows) {
    out << "delta_vt " << format_offset(row.delta_vt_mv) << " mV: ";
    if (row.fit) {
      out << "lambda1=" << format_double(row.fit->model.lambda1) << " lambda2=" << format_double(row.fit->model.lambda2)
          << "; ";
    }
    if (!row.code) {
      out << "NO FEASIBLE CODE";
      if (!row.note.empty()) out << " (" << row.note << ')';
      out << '\n';
      continue;
    }
    out << "BCH(" << row.code->n << ',' << row.code->m << ',' << row.code->t << ')'
        << (row.code_fixed ? " [fixed]" : "") << ", " << row.cells << " cells, total area ";
    if (row.decoder_area_known) {
      out << rounded(row.total_area_um2) << " um^2";
    } else {
      out << "unknown (no decoder area for t=" << row.code->t << ')';
    }
    if (!row.distribution.samples.empty()) {
      out << ", criterion " << (row.criterion_pass ? "pass" : "FAIL") << " at " << format_sci(row.criterion_percentile, 3);
    }
    for (const AttackFigure& a : row.attacks) {
      out << "; P_RSkey(sigma_err=" << format_double(a.sigma_err_mv) << ",C=" << a.chips
          << ")=" << format_sci(a.p_rskey, 3) << " [" << a.measurements << " measurements]";
    }
    if (!row.note.empty()) out << " (" << row.note << ')';
    out << '\n';
  }
  if (!report.tradeoff.empty()) {
    out << "\ntradeoff at delta_vt " << format_offset(config.tradeoff_delta_vt_mv) << " mV, sigma_err "
        << format_double(config.tradeoff_sigma_err_mv) << " mV: t from " << report.tradeoff.front().t << " down to "
        << report.tradeoff.back().t << '\n';
  }
}

void emit_reports(const Report& report, const std::filesystem::path& out_dir) {
  if (report.rows.empty()) throw Error(ErrorCode::InvalidArgument, "report has no design points");
  report.config.validate();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  write_file(out_dir / "table1.csv", [&](std::ostream& out) { write_table1_csv(report, out); });

  write_file(out_dir / "fits.csv", [&](std::ostream& out) {
    out << "delta_vt,lambda1,lambda2,residual\n";
    for (const DesignRecord& row : report.rows) {
      if (!row.fit) continue;
      out << format_offset(row.delta_vt_mv) << ',' << format_double(row.fit->model.lambda1) << ','
          << format_double(row.fit->model.lambda2) << ',' << format_double(row.fit->residual) << '\n';
    }
  });

  write_file(out_dir / "criterion.csv", [&](std::ostream& out) {
    out << "delta_vt,code_t,pass,percentile_value\n";
    for (const DesignRecord& row : report.rows) {
      for (const CandidateOutcome& c : row.candidates) {
        out << format_offset(row.delta_vt_mv) << ',' << c.t << ',' << (c.pass ? "true" : "false") << ','
            << format_sci(c.percentile_value) << '\n';
      }
    }
  });

  write_file(out_dir / "attacks.csv", [&](std::ostream& out) {
    out << "delta_vt,n,m,t,cells,sigma_err,C,p_rskey,measurements\n";
    for (const DesignRecord& row : report.rows) {
      if (!row.code) continue;
      for (const AttackFigure& a : row.attacks) {
        out << format_offset(row.delta_vt_mv) << ',' << row.code->n << ',' << row.code->m << ',' << row.code->t << ','
            << row.cells << ',' << format_double(a.sigma_err_mv) << ',' << a.chips << ',' << format_sci(a.p_rskey)
            << ',' << a.measurements << '\n';
      }
    }
  });

  write_file(out_dir / "success_vs_chips.csv", [&](std::ostream& out) {
    out << "delta_vt,C,p_rskey\n";
    for (const DesignRecord& row : report.rows) {
      for (const ChipCountPoint& p : row.chips_curve) {
        out << format_offset(row.delta_vt_mv) << ',' << p.chips << ',' << format_sci(p.p_rskey) << '\n';
      }
    }
  });

  write_file(out_dir / "tradeoff.csv", [&](std::ostream& out) { write_tradeoff_csv(report.tradeoff, out); });

  for (const DesignRecord& row : report.rows) {
    if (row.distribution.samples.empty()) continue;
    write_file(out_dir / ("keyfail_dist_" + format_offset(row.delta_vt_mv) + ".csv"), [&](std::ostream& out) {
      out << "chip_index,key_failure_prob\n";
      for (std::size_t i = 0; i < row.distribution.samples.size(); ++i) {
        out << i << ',' << format_sci(row.distribution.samples[i]) << '\n';
      }
    });
  }

  if (report.calibration) {
    write_file(out_dir / "calibration.csv", [&](std::ostream& out) {
      out << "sigma_noise,matches\n";
      for (const auto& [sigma, matches] : report.calibration->evaluations) {
        out << format_double(sigma) << ',' << matches << '\n';
      }
    });
  }

  write_file(out_dir / "summary.txt", [&](std::ostream& out) { write_summary(report, out); });
}

}  // namespace tvkey
