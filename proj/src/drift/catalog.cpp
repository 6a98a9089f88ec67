#include <cmath>
#include <map>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/drift/drift_field.hpp"
#include "sslab/drift/mollify.hpp"

namespace sslab::drift {

namespace {

std::string dim_tag(int d) { return "d=" + std::to_string(d); }

class InverseSquare final : public DriftField {
 public:
  InverseSquare(int d, double delta)
      : DriftField(DriftKind::inverse_square, d, {delta}, false), coef_(std::sqrt(delta) * 0.5 * (d - 2)) {}

  void eval(double, const double* x, double* out) const override {
    double r2 = 0.0;
    for (int a = 0; a < d(); ++a) r2 += x[a] * x[a];
    const double f = r2 > 0.0 ? coef_ / r2 : 0.0;
    for (int a = 0; a < d(); ++a) out[a] = f * x[a];
  }
  std::string id() const override { return "inverse-square:" + dim_tag(d()) + ":delta=" + fmt(params()[0]); }
  Symmetry symmetry() const override { return Symmetry::vector_radial; }
  double radial_profile(double, double r) const override { return r > 0.0 ? coef_ / r : INFINITY; }

 private:
  double coef_;
};

class BoundedSmooth : public DriftField {
 public:
  BoundedSmooth(int d, const std::vector<double>& v, double width)
      : DriftField(DriftKind::bounded_smooth, d, with_width(v, width), false), width_(width) {
    require(static_cast<int>(v.size()) == d, ErrorCode::invalid_parameter,
            "bounded-smooth direction needs " + std::to_string(d) + " components");
    require(width > 0.0, ErrorCode::invalid_parameter, "bounded-smooth width must be positive");
    for (int a = 0; a < d; ++a) {
      require(std::isfinite(v[a]), ErrorCode::invalid_parameter, "bounded-smooth direction must be finite");
      v_[a] = v[a];
    }
  }

  void eval(double, const double* x, double* out) const override {
    double r2 = 0.0;
    for (int a = 0; a < d(); ++a) r2 += x[a] * x[a];
    const double f = envelope(r2);
    for (int a = 0; a < d(); ++a) out[a] = f * v_[a];
  }
  std::string id() const override {
    std::string s = "bounded-smooth:" + dim_tag(d()) + ":v=";
    for (int a = 0; a < d(); ++a) s += (a ? "/" : "") + fmt(v_[a]);
    return s + ":width=" + fmt(width_);
  }
  std::optional<double> sup_bound() const override {
    double s = 0.0;
    for (int a = 0; a < d(); ++a) s += v_[a] * v_[a];
    return std::sqrt(s);
  }
  Symmetry symmetry() const override { return Symmetry::scalar_radial; }
  double radial_profile(double, double r) const override { return envelope(r * r); }
  std::array<double, 8> direction() const override { return v_; }
  std::optional<LpsExponents> lps() const override { return LpsExponents{INFINITY, INFINITY, false, false}; }

 private:
  static std::vector<double> with_width(std::vector<double> v, double width) {
    v.push_back(width);
    return v;
  }
  double envelope(double r2) const { return std::isinf(width_) ? 1.0 : std::exp(-r2 / (2.0 * width_ * width_)); }

  std::array<double, 8> v_{};
  double width_;
};

class Zero final : public BoundedSmooth {
 public:
  explicit Zero(int d) : BoundedSmooth(d, std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0), INFINITY) {}
  std::string id() const override { return "zero:" + dim_tag(d()); }
};

class LpsPower final : public DriftField {
 public:
  LpsPower(int d, double a, double amp) : DriftField(DriftKind::lps_power, d, {a, amp}, false, 1.0), a_(a), amp_(amp) {
    require(a >= 0.0 && std::isfinite(a), ErrorCode::invalid_parameter, "lps-power exponent must be >= 0");
    require(std::isfinite(amp), ErrorCode::invalid_parameter, "lps-power amplitude must be finite");
  }

  void eval(double t, const double* x, double* out) const override {
    double r2 = 0.0;
    for (int a = 0; a < d(); ++a) r2 += x[a] * x[a];
    const double r = std::sqrt(r2);
    const double f = r > 0.0 ? radial_profile(t, r) / r : 0.0;
    for (int a = 0; a < d(); ++a) out[a] = f * x[a];
  }
  std::string id() const override {
    return "lps-power:" + dim_tag(d()) + ":a=" + fmt(a_) + ":amp=" + fmt(amp_);
  }
  std::optional<double> sup_bound() const override {
    if (a_ == 0.0) return std::abs(amp_);
    return std::nullopt;
  }
  Symmetry symmetry() const override { return Symmetry::vector_radial; }
  double radial_profile(double, double r) const override { return r <= 1.0 ? amp_ * std::pow(r, -a_) : 0.0; }
  std::vector<double> profile_breaks() const override { return {1.0}; }
  std::optional<LpsExponents> lps() const override {
    if (a_ == 0.0) return LpsExponents{INFINITY, INFINITY, false, false};
    if (a_ > 2.0) return std::nullopt;
    LpsExponents e;
    e.q = INFINITY;
    e.r = d() / a_;
    e.r_open = true;
    e.critical = a_ < 1.0;
    return e;
  }

 private:
  double a_;
  double amp_;
};

class Difference final : public DriftField {
 public:
  Difference(DriftPtr lhs, DriftPtr rhs)
      : DriftField(DriftKind::difference, lhs->d(), {}, lhs->time_dependent() || rhs->time_dependent(),
                   combined_support(*lhs, *rhs)),
        lhs_(std::move(lhs)),
        rhs_(std::move(rhs)) {}

  void eval(double t, const double* x, double* out) const override {
    double tmp[8];
    lhs_->eval(t, x, out);
    rhs_->eval(t, x, tmp);
    for (int a = 0; a < d(); ++a) out[a] -= tmp[a];
  }
  void eval_block(double t, std::size_t count, const double* const* x, double* const* out) const override {
    std::vector<double> buf(count * static_cast<std::size_t>(d()));
    double* planes[8];
    for (int a = 0; a < d(); ++a) planes[a] = buf.data() + static_cast<std::size_t>(a) * count;
    lhs_->eval_block(t, count, x, out);
    rhs_->eval_block(t, count, x, planes);
    for (int a = 0; a < d(); ++a)
      for (std::size_t i = 0; i < count; ++i) out[a][i] -= planes[a][i];
  }
  std::string id() const override { return "difference:" + lhs_->id() + "|" + rhs_->id(); }
  std::optional<double> sup_bound() const override {
    auto a = lhs_->sup_bound();
    auto b = rhs_->sup_bound();
    if (a && b) return *a + *b;
    return std::nullopt;
  }
  Symmetry symmetry() const override {
    const Symmetry s = lhs_->symmetry();
    if (s != rhs_->symmetry()) return Symmetry::none;
    if (s == Symmetry::scalar_radial && lhs_->direction() != rhs_->direction()) return Symmetry::none;
    return s;
  }
  double radial_profile(double t, double r) const override {
    return lhs_->radial_profile(t, r) - rhs_->radial_profile(t, r);
  }
  std::array<double, 8> direction() const override { return lhs_->direction(); }
  std::vector<double> profile_breaks() const override {
    auto b = lhs_->profile_breaks();
    for (double v : rhs_->profile_breaks()) b.push_back(v);
    return b;
  }

 private:
  static std::optional<double> combined_support(const DriftField& a, const DriftField& b) {
    require(a.d() == b.d(), ErrorCode::grid_mismatch, "difference operands have different dimensions");
    if (a.support_radius() && b.support_radius()) return std::max(*a.support_radius(), *b.support_radius());
    return std::nullopt;
  }

  DriftPtr lhs_;
  DriftPtr rhs_;
};

std::map<std::string, std::string> parse_keys(const std::vector<std::string>& parts, std::size_t from,
                                              const std::string& id) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = from; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    require(eq != std::string::npos, ErrorCode::invalid_parameter, "malformed drift id '" + id + "'");
    kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  return kv;
}

const std::string& key(const std::map<std::string, std::string>& kv, const std::string& k, const std::string& id) {
  auto it = kv.find(k);
  require(it != kv.end(), ErrorCode::invalid_parameter, "drift id '" + id + "' lacks '" + k + "'");
  return it->second;
}

}  // namespace

DriftPtr make_inverse_square(int d, double delta) {
  require(d >= 3, ErrorCode::invalid_dimension, "inverse-square needs d >= 3");
  require(delta > 0.0 && std::isfinite(delta), ErrorCode::invalid_parameter, "inverse-square needs delta > 0");
  return std::make_shared<InverseSquare>(d, delta);
}

DriftPtr make_bounded_smooth(int d, const std::vector<double>& v, double width) {
  return std::make_shared<BoundedSmooth>(d, v, width);
}

DriftPtr make_zero(int d) {
  require(d >= 3, ErrorCode::invalid_dimension, "zero field needs d >= 3");
  return std::make_shared<Zero>(d);
}

DriftPtr make_lps_power(int d, double a, double amp) { return std::make_shared<LpsPower>(d, a, amp); }

DriftPtr make_difference(DriftPtr lhs, DriftPtr rhs) {
  require(lhs && rhs, ErrorCode::invalid_parameter, "difference of null fields");
  return std::make_shared<Difference>(std::move(lhs), std::move(rhs));
}

DriftPtr make_from_id(const std::string& id) {
  const auto parts = split(id, ':');
  const std::string& kind = parts[0];
  if (kind == "difference") {
    const auto rest = id.substr(kind.size() + 1);
    const auto bar = rest.find('|');
    require(bar != std::string::npos, ErrorCode::invalid_parameter, "difference id needs 'lhs|rhs'");
    return make_difference(make_from_id(rest.substr(0, bar)), make_from_id(rest.substr(bar + 1)));
  }
  if (kind == "mollified") {
    std::size_t i = 1;
    std::map<std::string, std::string> kv;
    std::size_t consumed = kind.size() + 1;
    while (i < parts.size() && parts[i].find('=') != std::string::npos) {
      const auto eq = parts[i].find('=');
      kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
      consumed += parts[i].size() + 1;
      ++i;
    }
    require(i < parts.size(), ErrorCode::invalid_parameter, "mollified id lacks an inner field");
    const int n = static_cast<int>(parse_int(key(kv, "n", id)));
    auto sched = MollificationSchedule::standard(n);
    if (kv.count("width")) sched.width = parse_double(kv["width"]);
    if (kv.count("tcap")) sched.time_cap = parse_double(kv["tcap"]);
    if (kv.count("xcap")) sched.space_cap = parse_double(kv["xcap"]);
    if (kv.count("bcap")) sched.value_cap = parse_double(kv["bcap"]);
    return mollify(make_from_id(id.substr(consumed)), sched);
  }
  const auto kv = parse_keys(parts, 1, id);
  const int d = static_cast<int>(parse_int(key(kv, "d", id)));
  if (kind == "inverse-square") return make_inverse_square(d, parse_double(key(kv, "delta", id)));
  if (kind == "zero") return make_zero(d);
  if (kind == "bounded-smooth") {
    const auto v = parse_list(key(kv, "v", id), '/');
    const double width = kv.count("width") ? parse_double(kv.at("width")) : INFINITY;
    return make_bounded_smooth(d, v, width);
  }
  if (kind == "lps-power") {
    const double amp = kv.count("amp") ? parse_double(kv.at("amp")) : 1.0;
    return make_lps_power(d, parse_double(key(kv, "a", id)), amp);
  }
  fail(ErrorCode::invalid_parameter, "unknown drift kind '" + kind + "'");
}

}  // namespace sslab::drift
