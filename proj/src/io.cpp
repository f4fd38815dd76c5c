#include "twistgas/io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace twistgas {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(out), columns_(columns.size()) {
  out_ << "# schema: " << schema << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::separator() {
  if (field_ >= columns_) throw std::logic_error("csv row has too many fields");
  if (field_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double x) {
  separator();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::uint64_t x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& x) {
  separator();
  out_ << x;
  return *this;
}

void CsvWriter::end_row() {
  if (field_ != columns_) throw std::logic_error("csv row has too few fields");
  out_ << '\n';
  field_ = 0;
}

EventLogWriter::EventLogWriter(std::ostream& out)
    : csv_(out, "twistgas.events/1",
           {"n", "t", "kind", "i", "j", "wall", "u_i_before", "v_i_before", "u_i_after",
            "v_i_after", "u_j_before", "v_j_before", "u_j_after", "v_j_after", "phi",
            "psi", "energy"}) {}

void EventLogWriter::write(const PhaseState<double>& after, const StepOutcome<double>& step) {
  const bool wall = step.event.kind == EventKind::DiskWall;
  const double nan = std::nan("");
  csv_ << after.collisions << after.time << std::string(wall ? "wall" : "pair")
       << step.event.i << (wall ? -1 : step.event.j) << (wall ? index(step.event.wall) : -1)
       << step.before_i.x() << step.before_i.y() << step.after_i.x() << step.after_i.y()
       << (wall ? nan : step.before_j.x()) << (wall ? nan : step.before_j.y())
       << (wall ? nan : step.after_j.x()) << (wall ? nan : step.after_j.y())
       << (step.wall_angles ? step.wall_angles->phi : nan)
       << (step.wall_angles ? step.wall_angles->psi : nan) << kinetic_energy(after);
  csv_.end_row();
}

void write_escape_csv(std::ostream& out, const std::vector<EscapeStats>& stats) {
  CsvWriter csv(out, "twistgas.escape_scan/1",
                {"lambda", "mean_tau", "stderr", "censored", "n", "escaped", "frozen",
                 "anomalies", "ks_distance"});
  for (const auto& s : stats) {
    csv << s.lambda << s.mean_tau << s.stderr_tau << s.censored_count << s.n << s.escaped
        << s.frozen_count << s.anomalies << s.ks_distance;
    csv.end_row();
  }
}

void write_drift_csv(std::ostream& out, const DriftCurve& curve) {
  CsvWriter csv(out, "twistgas.drift/1", {"bin_center", "mean_du", "stderr", "count"});
  for (std::size_t i = 0; i < curve.centers.size(); ++i) {
    csv << curve.centers[i] << curve.mean_du[i] << curve.stderr_du[i] << curve.counts[i];
    csv.end_row();
  }
}

void write_sstar_csv(std::ostream& out, const std::vector<SStarDecay>& runs) {
  CsvWriter csv(out, "twistgas.sstar_decay/1",
                {"run", "collision_index", "event", "m", "odd", "log_dv", "log_ell"});
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& rec : runs[r].records) {
      csv << static_cast<std::uint64_t>(r) << rec.collision_index << rec.event << rec.m
          << static_cast<int>(rec.odd) << rec.log_dv << rec.log_ell;
      csv.end_row();
    }
  }
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j{{"schema", "twistgas.fit/1"},
                   {"model", to_string(fit.model)},
                   {"a", fit.a},
                   {"c", fit.c},
                   {"rms_residual", fit.rms_residual}};
  if (fit.model == FitModel::Refined) j["b"] = fit.b;
  return j;
}

nlohmann::json to_json(const EscapeStats& s) {
  nlohmann::json hist = nlohmann::json::array();
  std::size_t last = 0;
  for (std::size_t i = 0; i < s.histogram.size(); ++i) {
    if (s.histogram[i]) last = i + 1;
  }
  for (std::size_t i = 0; i < last; ++i) hist.push_back(s.histogram[i]);
  return {{"lambda", s.lambda},         {"n", s.n},
          {"escaped", s.escaped},       {"mean_tau", s.mean_tau},
          {"stderr", s.stderr_tau},     {"censored", s.censored_count},
          {"frozen", s.frozen_count},   {"anomalies", s.anomalies},
          {"ks_distance", s.ks_distance}, {"log2_histogram", hist}};
}

}  // namespace twistgas
