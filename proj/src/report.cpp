#include "lcsr/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace lcsr {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

bool witness_less(const SampleWitness& a, const SampleWitness& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.point.chart != b.point.chart) return a.point.chart < b.point.chart;
  return a.point.coords < b.point.coords;
}

bool within(const CheckRecord& r) {
  switch (r.comparison) {
    case Comparison::below:
      return r.max_residual < r.tolerance;
    case Comparison::above:
      return r.min_residual > r.tolerance;
    case Comparison::max_above:
      return r.max_residual > r.tolerance;
  }
  return false;
}

}  // namespace

std::string comparison_name(Comparison c) {
  switch (c) {
    case Comparison::below:
      return "<";
    case Comparison::above:
      return ">";
    case Comparison::max_above:
      return "max >";
  }
  return "<";
}

void CheckRecord::set_tolerance(double tol) {
  tolerance = tol;
  if (status == CheckStatus::not_applicable) return;
  status = errors == 0 && within(*this) ? CheckStatus::pass : CheckStatus::fail;
}

Rng::Rng(std::uint64_t seed) : state_(seed) {}

Rng Rng::substream(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix(s) ^ fnv1a(label);
  mixed = splitmix(mixed) ^ (index * 0xD1B54A32D192ED03ULL);
  return Rng(splitmix(mixed));
}

std::uint64_t Rng::next() { return splitmix(state_); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

CheckAccumulator::CheckAccumulator(std::string id, std::string anchor, double tolerance, Comparison comparison,
                                   std::optional<double> xi)
    : id_(std::move(id)), anchor_(std::move(anchor)), tolerance_(tolerance), comparison_(comparison), xi_(xi) {}

void CheckAccumulator::add(double value, ChartPoint point) {
  if (!std::isfinite(value)) {
    add_failure("non-finite residual", std::move(point));
    return;
  }
  values_.push_back({value, std::move(point)});
}

void CheckAccumulator::add_failure(const std::string& message, ChartPoint point) {
  errors_.push_back(message + " [" + point.chart + "]");
}

CheckRecord CheckAccumulator::finish() const {
  CheckRecord r;
  r.id = id_;
  r.anchor = anchor_;
  r.xi = xi_;
  r.tolerance = tolerance_;
  r.comparison = comparison_;
  r.samples = static_cast<int>(values_.size() + errors_.size());
  r.note = note_;
  if (r.samples == 0) {
    r.status = CheckStatus::not_applicable;
    if (r.note.empty()) r.note = "no samples";
    return r;
  }
  auto sorted = values_;
  std::sort(sorted.begin(), sorted.end(), witness_less);
  double sum = 0.0;
  for (const auto& w : sorted) sum += w.value;
  if (!sorted.empty()) {
    r.max_residual = sorted.back().value;
    r.min_residual = sorted.front().value;
    r.mean_residual = sum / static_cast<double>(sorted.size());
  }
  r.errors = static_cast<int>(errors_.size());
  const bool ok = errors_.empty() && !sorted.empty() && within(r);
  const std::size_t shown = std::min<std::size_t>(3, sorted.size());
  for (std::size_t i = 0; i < shown; ++i) {
    r.worst.push_back(comparison_ == Comparison::above ? sorted[i] : sorted[sorted.size() - 1 - i]);
  }
  if (!errors_.empty()) {
    auto errs = errors_;
    std::sort(errs.begin(), errs.end());
    std::string msg = std::to_string(errs.size()) + " evaluation(s) raised: " + errs.front();
    r.note = r.note.empty() ? msg : r.note + "; " + msg;
  }
  r.status = ok ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckRecord CheckAccumulator::not_applicable(std::string id, std::string anchor, double tolerance, std::string note,
                                             std::optional<double> xi, Comparison comparison) {
  CheckRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.xi = xi;
  r.tolerance = tolerance;
  r.comparison = comparison;
  r.status = CheckStatus::not_applicable;
  r.note = std::move(note);
  return r;
}

std::string VerificationReport::verdict() const {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::fail) return "fail";
  }
  for (const auto& c : controls) {
    if (c.status == CheckStatus::fail) return "control_failure";
  }
  return "pass";
}

const CheckRecord* VerificationReport::find(std::string_view id, std::optional<double> xi) const {
  for (const auto* list : {&checks, &controls}) {
    for (const auto& c : *list) {
      if (c.id == id && (!xi || (c.xi && *c.xi == *xi))) return &c;
    }
  }
  return nullptr;
}

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::not_applicable:
      return "n/a";
  }
  return "n/a";
}

namespace {

nlohmann::ordered_json record_json(const CheckRecord& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["anchor"] = c.anchor;
  j["xi"] = c.xi ? nlohmann::ordered_json(*c.xi) : nlohmann::ordered_json(nullptr);
  j["status"] = status_name(c.status);
  j["max_residual"] = c.max_residual;
  j["mean_residual"] = c.mean_residual;
  j["min_residual"] = c.min_residual;
  j["tolerance"] = c.tolerance;
  j["comparison"] = comparison_name(c.comparison);
  j["samples"] = c.samples;
  auto worst = nlohmann::ordered_json::array();
  for (const auto& w : c.worst) {
    nlohmann::ordered_json e;
    e["value"] = w.value;
    e["chart"] = w.point.chart;
    e["coords"] = w.point.coords;
    worst.push_back(std::move(e));
  }
  j["worst"] = std::move(worst);
  j["note"] = c.note;
  j["errors"] = c.errors;
  return j;
}

}  // namespace

std::string to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["verdict"] = r.verdict();
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["xi"] = r.xis;
  j["toolkit_version"] = r.toolkit_version;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) checks.push_back(record_json(c));
  j["checks"] = std::move(checks);
  auto controls = nlohmann::ordered_json::array();
  for (const auto& c : r.controls) controls.push_back(record_json(c));
  j["controls"] = std::move(controls);
  return j.dump(2) + "\n";
}

std::string to_text(const VerificationReport& r) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific;
  os << "scenario " << r.scenario << "  seed " << r.seed << "  samples " << r.samples << "  version "
     << r.toolkit_version << "\n";
  auto emit = [&os](const CheckRecord& c, bool control) {
    std::string tag = status_name(c.status);
    if (control && c.status == CheckStatus::pass) tag = "violated";
    if (control && c.status == CheckStatus::fail) tag = "NOT violated";
    os << "[" << tag << "] " << c.id;
    if (c.xi) os << " (xi=" << std::defaultfloat << *c.xi << std::scientific << ")";
    if (c.status != CheckStatus::not_applicable) {
      os << "  max " << c.max_residual << "  mean " << c.mean_residual << "  " << comparison_name(c.comparison)
         << " " << c.tolerance << "  n=" << c.samples;
    }
    os << "\n      " << c.anchor;
    if (!c.note.empty()) os << "\n      note: " << c.note;
    os << "\n";
    const bool bad = control ? c.status == CheckStatus::fail : c.status == CheckStatus::fail;
    if (bad) {
      for (const auto& w : c.worst) {
        os << "      worst " << w.value << " at " << w.point.chart << " (";
        for (std::size_t i = 0; i < w.point.coords.size(); ++i) {
          os << (i ? ", " : "") << std::defaultfloat << std::setprecision(6) << w.point.coords[i];
        }
        os << ")" << std::scientific << std::setprecision(3) << "\n";
      }
    }
  };
  os << "checks:\n";
  for (const auto& c : r.checks) emit(c, false);
  os << "negative controls:\n";
  for (const auto& c : r.controls) emit(c, true);
  os << "verdict: " << r.verdict() << "\n";
  return os.str();
}

}  // namespace lcsr
