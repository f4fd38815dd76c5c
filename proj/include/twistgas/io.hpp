#ifndef TWISTGAS_IO_HPP
#define TWISTGAS_IO_HPP

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "twistgas/engine.hpp"
#include "twistgas/experiments.hpp"

namespace twistgas {

/// %.17g, so every value round-trips.
std::string format_double(double x);

/// Every CSV starts with "# schema: <name>/<version>" and a header row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::string& schema,
            const std::vector<std::string>& columns);

  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(std::uint64_t x);
  CsvWriter& operator<<(std::int64_t x);
  CsvWriter& operator<<(int x) { return *this << static_cast<std::int64_t>(x); }
  CsvWriter& operator<<(const std::string& x);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t field_ = 0;
};

/// Event log, schema twistgas.events/1.
class EventLogWriter {
 public:
  explicit EventLogWriter(std::ostream& out);
  void write(const PhaseState<double>& after, const StepOutcome<double>& step);

 private:
  CsvWriter csv_;
};

/// Schema twistgas.escape_scan/1.
void write_escape_csv(std::ostream& out, const std::vector<EscapeStats>& stats);

/// Schema twistgas.drift/1.
void write_drift_csv(std::ostream& out, const DriftCurve& curve);

/// Schema twistgas.sstar_decay/1.
void write_sstar_csv(std::ostream& out, const std::vector<SStarDecay>& runs);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const EscapeStats& stats);

}  // namespace twistgas

#endif  // TWISTGAS_IO_HPP
