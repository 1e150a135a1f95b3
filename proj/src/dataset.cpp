#include "miximp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "miximp/errors.hpp"

namespace miximp {

std::string to_string(VarKind kind) {
  switch (kind) {
    case VarKind::continuous: return "continuous";
    case VarKind::binary: return "binary";
    case VarKind::tte: return "tte";
    case VarKind::ttre: return "ttre";
  }
  return "?";
}

VarKind var_kind_from_string(const std::string& s) {
  if (s == "continuous") return VarKind::continuous;
  if (s == "binary") return VarKind::binary;
  if (s == "tte") return VarKind::tte;
  if (s == "ttre") return VarKind::ttre;
  throw ValidationError("unknown variable kind: " + s);
}

IntervalGrid::IntervalGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("grid needs at least two time points");
  if (times_.front() != 0.0) throw ValidationError("grid must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1]))
      throw ValidationError("grid times must be strictly increasing");
  }
}

std::vector<int> Dataset::longitudinal_schema_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(schema.size()); ++i) {
    if (schema[i].kind == VarKind::continuous || schema[i].kind == VarKind::binary)
      out.push_back(i);
  }
  return out;
}

int Dataset::tte_schema_index() const {
  for (int i = 0; i < static_cast<int>(schema.size()); ++i)
    if (schema[i].kind == VarKind::tte) return i;
  return -1;
}

int Dataset::ttre_schema_index() const {
  for (int i = 0; i < static_cast<int>(schema.size()); ++i)
    if (schema[i].kind == VarKind::ttre) return i;
  return -1;
}

int Dataset::subject_index(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(subjects.size()); ++i)
    if (subjects[i].id == id) return i;
  throw ValidationError("unknown subject id: " + id);
}

namespace {

void validate_subject(const Dataset& d, const SubjectRecord& s,
                      std::vector<Violation>& out) {
  const auto flag = [&](const std::string& reason) {
    out.push_back({s.id, reason});
  };
  const double t_max = d.grid.t_max();

  if (!(s.treatment == 0 || s.treatment == 1)) flag("treatment not in {0,1}");
  if (!(s.censor_time > 0.0) || s.censor_time > t_max)
    flag("censor time outside (0, t_max]");
  if (s.tte_time > s.censor_time) flag("tte time after censoring");
  if (s.tte_event == 0 && s.tte_time != s.censor_time)
    flag("censored tte time must equal censor time");
  if (!(s.tte_event == 0 || s.tte_event == 1)) flag("tte event not in {0,1}");

  for (std::size_t i = 0; i < s.recurrent_times.size(); ++i) {
    if (s.recurrent_times[i] > s.censor_time) {
      flag("event after censoring");
      break;
    }
    if (i > 0 && !(s.recurrent_times[i] > s.recurrent_times[i - 1])) {
      flag("recurrent times not strictly increasing");
      break;
    }
  }

  const auto longi = d.longitudinal_schema_indices();
  if (s.longitudinal.size() != longi.size()) {
    flag("longitudinal variable count does not match schema");
    return;
  }
  const int num_visits = d.grid.num_intervals() + 1;
  for (std::size_t v = 0; v < longi.size(); ++v) {
    const auto& spec = d.schema[static_cast<std::size_t>(longi[v])];
    const auto& vals = s.longitudinal[v];
    if (static_cast<int>(vals.size()) != num_visits) {
      flag("wrong number of visits for " + spec.name);
      continue;
    }
    bool seen_missing = false;
    for (int j = 0; j < num_visits; ++j) {
      const bool should_be_present = d.grid.time(j) <= s.censor_time;
      if (vals[static_cast<std::size_t>(j)].has_value()) {
        if (seen_missing) {
          flag("non-monotone longitudinal pattern in " + spec.name);
          break;
        }
        if (!should_be_present) {
          flag("value after censoring in " + spec.name);
          break;
        }
        const double x = *vals[static_cast<std::size_t>(j)];
        if (!std::isfinite(x)) {
          flag("non-finite value in " + spec.name);
          break;
        }
        if (spec.kind == VarKind::binary && x != 0.0 && x != 1.0) {
          flag("binary value outside {0,1} in " + spec.name);
          break;
        }
      } else {
        if (should_be_present) {
          flag("missing value before censoring in " + spec.name);
          break;
        }
        seen_missing = true;
      }
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  int n_tte = 0, n_ttre = 0;
  std::set<std::string> names;
  for (const auto& v : d.schema) {
    if (!names.insert(v.name).second)
      report.violations.push_back({"", "duplicate variable name: " + v.name});
    if (v.kind == VarKind::tte) ++n_tte;
    if (v.kind == VarKind::ttre) ++n_ttre;
  }
  if (n_tte != 1)
    report.violations.push_back({"", "schema must declare exactly one tte variable"});
  if (n_ttre > 1)
    report.violations.push_back({"", "schema allows at most one ttre variable"});

  std::set<std::string> ids;
  for (const auto& s : d.subjects) {
    if (!ids.insert(s.id).second)
      report.violations.push_back({s.id, "duplicate subject id"});
    validate_subject(d, s, report.violations);
  }
  return report;
}

IntervalView interval_view(const Dataset& d, int subject_idx, int j) {
  if (subject_idx < 0 || subject_idx >= static_cast<int>(d.subjects.size()))
    throw ValidationError("subject index out of range");
  if (j < 1 || j > d.grid.num_intervals())
    throw ValidationError("interval index out of range");
  const auto& s = d.subjects[static_cast<std::size_t>(subject_idx)];
  const double lo = d.grid.time(j - 1);
  const double hi = d.grid.time(j);

  IntervalView view;
  view.subject_id = s.id;
  view.j = j;
  if (s.tte_time > lo) {
    IntervalView::TteInInterval z1;
    z1.rel_time = std::min(s.tte_time - lo, hi - lo);
    z1.event_in_interval = (s.tte_event == 1 && s.tte_time <= hi) ? 1 : 0;
    view.z1 = z1;
  }
  view.z1_star = (s.tte_event == 1 && s.tte_time <= hi) ? 1 : 0;
  for (double t : s.recurrent_times)
    if (t > lo && t <= hi) ++view.z2_star;
  view.zk.reserve(s.longitudinal.size());
  for (const auto& vals : s.longitudinal)
    view.zk.push_back(vals[static_cast<std::size_t>(j)]);
  return view;
}

IntervalView interval_view(const Dataset& d, const std::string& subject_id, int j) {
  return interval_view(d, d.subject_index(subject_id), j);
}

int last_observed_interval(const Dataset& d, int subject_idx) {
  if (subject_idx < 0 || subject_idx >= static_cast<int>(d.subjects.size()))
    throw ValidationError("subject index out of range");
  const auto& s = d.subjects[static_cast<std::size_t>(subject_idx)];
  int j = 0;
  while (j + 1 <= d.grid.num_intervals() && d.grid.time(j + 1) <= s.censor_time) ++j;
  return j;
}

int last_observed_interval(const Dataset& d, const std::string& subject_id) {
  return last_observed_interval(d, d.subject_index(subject_id));
}

}  // namespace miximp
