#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace miximp {

enum class VarKind { continuous, binary, tte, ttre };

std::string to_string(VarKind kind);
VarKind var_kind_from_string(const std::string& s);

struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::continuous;
  bool terminal = false;  // meaningful for tte only
};

// Ordered partition 0 = t_0 < t_1 < ... < t_J of the study duration.
class IntervalGrid {
 public:
  IntervalGrid() = default;
  explicit IntervalGrid(std::vector<double> times);

  int num_intervals() const { return static_cast<int>(times_.size()) - 1; }
  double time(int j) const { return times_.at(static_cast<std::size_t>(j)); }
  double width(int j) const { return time(j) - time(j - 1); }
  double t_max() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
};

struct SubjectRecord {
  std::string id;
  int treatment = 0;        // A in {0,1}
  Eigen::VectorXd baseline; // X
  double censor_time = 0;   // T_c, last time on study
  double tte_time = 0;      // T_1 = min(event time, T_c)
  int tte_event = 0;        // 1 if the event was observed before censoring
  std::vector<double> recurrent_times;  // strictly increasing, all <= T_c
  // One row per longitudinal (continuous/binary) variable in schema order;
  // each row has J+1 slots, index 0 = baseline. Missing = nullopt.
  std::vector<std::vector<std::optional<double>>> longitudinal;
};

struct Dataset {
  std::vector<VariableSpec> schema;
  IntervalGrid grid;
  std::vector<SubjectRecord> subjects;

  // Indices into schema of the continuous/binary variables, in schema order.
  std::vector<int> longitudinal_schema_indices() const;
  int tte_schema_index() const;   // -1 if absent
  int ttre_schema_index() const;  // -1 if absent
  int subject_index(const std::string& id) const;  // throws if unknown
};

struct Violation {
  std::string subject_id;  // empty for dataset-level problems
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

// Interval-relative view of one subject at interval j (1-based).
struct IntervalView {
  std::string subject_id;
  int j = 0;
  struct TteInInterval {
    double rel_time = 0;       // min(T_1 - t_{j-1}, t_j - t_{j-1})
    int event_in_interval = 0; // 1 iff the event lands in (t_{j-1}, t_j]
  };
  std::optional<TteInInterval> z1;  // undefined when T_1 <= t_{j-1}
  int z1_star = 0;  // event occurred at or before t_j
  int z2_star = 0;  // recurrent events in (t_{j-1}, t_j]
  std::vector<std::optional<double>> zk;  // longitudinal values at t_j
};

ValidationReport validate_dataset(const Dataset& d);
IntervalView interval_view(const Dataset& d, const std::string& subject_id, int j);
IntervalView interval_view(const Dataset& d, int subject_idx, int j);

// Largest j with t_j <= T_c: the last visit with observed longitudinal data.
int last_observed_interval(const Dataset& d, const std::string& subject_id);
int last_observed_interval(const Dataset& d, int subject_idx);

}  // namespace miximp
