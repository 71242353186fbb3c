#include "hjb/config.hpp"

#include "hjb/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace hjb {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& reason) { throw ConfigError("config: " + reason); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) fail("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail("'" + key + "' must be finite");
  return v;
}

double number_or(const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), key) : fallback;
}

const json& required(const json& obj, const std::string& key) {
  if (!obj.is_object()) fail("expected an object around '" + key + "'");
  if (!obj.contains(key)) fail("missing key '" + key + "'");
  return obj.at(key);
}

/// Scalar field of (t, x) with optional analytic derivatives.
struct Expression {
  SpaceTimeFn value;
  bool time_dependent = false;
  std::optional<SmoothFunction> smooth;
};

Expression constant_expression(int dim, double v) {
  Expression e;
  e.value = [v](double, const Vector&) { return v; };
  e.smooth = constant_function(dim, v);
  return e;
}

Expression parse_expression(const json& j, const std::string& key, int dim, const Vector& period) {
  if (j.is_number()) return constant_expression(dim, number(j, key));
  if (!j.is_object()) fail("'" + key + "' must be a number or an expression object");
  if (!j.contains("name") || !j.at("name").is_string())
    fail("expression '" + key + "' needs a string 'name'");
  const std::string name = j.at("name").get<std::string>();
  const json params = j.value("params", json::object());
  if (!params.is_object()) fail("'params' of '" + key + "' must be an object");

  Expression e;
  if (name == "const") {
    e = constant_expression(dim, number_or(params, "value", 0.0));
  } else if (name == "sin_sum") {
    const double amplitude = number_or(params, "amplitude", 1.0);
    const double wavenumber = number_or(params, "wavenumber", 1.0);
    const double decay = number_or(params, "decay", 0.0);
    const double phase = number_or(params, "phase", 0.0);
    e.smooth = sine_mode(dim, amplitude, wavenumber, decay, phase);
    e.value = e.smooth->value;
    e.time_dependent = decay != 0.0;
  } else if (name == "gauss_bump") {
    const double amplitude = number_or(params, "amplitude", 1.0);
    const double width = number_or(params, "width", 1.0);
    if (!(width > 0.0)) fail("'width' of '" + key + "' must be positive");
    Vector center = 0.5 * period;
    if (params.contains("center")) {
      const json& c = params.at("center");
      if (c.is_number()) {
        center.setConstant(number(c, "center"));
      } else if (c.is_array() && static_cast<int>(c.size()) == dim) {
        for (int d = 0; d < dim; ++d) center[d] = number(c[d], "center");
      } else {
        fail("'center' of '" + key + "' must be a number or have one entry per dimension");
      }
    }
    e.value = [=](double, const Vector& x) {
      double r2 = 0.0;
      for (int d = 0; d < dim; ++d) {
        double dist = std::fmod(std::abs(x[d] - center[d]), period[d]);
        dist = std::min(dist, period[d] - dist);
        r2 += dist * dist;
      }
      return amplitude * std::exp(-r2 / (2.0 * width * width));
    };
  } else {
    fail("unknown expression '" + name + "' in '" + key + "'");
  }

  if (j.contains("part")) {
    const json& part = j.at("part");
    if (!part.is_string()) fail("'part' of '" + key + "' must be a string");
    const std::string which = part.get<std::string>();
    const double sign = which == "positive" ? 1.0 : which == "negative" ? -1.0 : 0.0;
    if (sign == 0.0) fail("'part' of '" + key + "' must be 'positive' or 'negative'");
    e.value = [inner = e.value, sign](double t, const Vector& x) {
      return std::max(0.0, sign * inner(t, x));
    };
    e.smooth.reset();
  }
  return e;
}

int parse_dim(const json& doc) {
  const json& d = required(doc, "dim");
  if (!d.is_number_integer() || d.get<int>() < 1) fail("'dim' must be a positive integer");
  return d.get<int>();
}

Vector parse_period(const json& doc, int dim) {
  const json& p = required(doc, "period");
  Vector period(dim);
  if (p.is_number()) {
    period.setConstant(number(p, "period"));
  } else if (p.is_array() && static_cast<int>(p.size()) == dim) {
    for (int d = 0; d < dim; ++d) period[d] = number(p[d], "period");
  } else {
    fail("'period' must be a number or have one entry per dimension");
  }
  if ((period.array() <= 0.0).any()) fail("'period' must be positive");
  return period;
}

double parse_horizon(const json& doc) {
  const double T = number(required(doc, "horizon"), "horizon");
  if (!(T > 0.0)) fail("'horizon' must be positive");
  return T;
}

/// Coefficients of one control as expressions.
struct ControlSpec {
  std::string label;
  std::vector<Expression> sigma;  // row-major dim x cols
  int sigma_cols = 0;
  std::vector<Expression> drift;
  Expression reaction;
  Expression source;

  bool time_dependent() const {
    bool any = reaction.time_dependent || source.time_dependent;
    for (const Expression& e : sigma) any = any || e.time_dependent;
    for (const Expression& e : drift) any = any || e.time_dependent;
    return any;
  }

  LocalCoefficients evaluate(int dim, double t, const Vector& x) const {
    LocalCoefficients k;
    k.sigma.resize(dim, sigma_cols);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < sigma_cols; ++c)
        k.sigma(r, c) = sigma[static_cast<std::size_t>(r * sigma_cols + c)].value(t, x);
    k.drift.resize(dim);
    for (int d = 0; d < dim; ++d) k.drift[d] = drift[static_cast<std::size_t>(d)].value(t, x);
    k.reaction = reaction.value(t, x);
    k.source = source.value(t, x);
    return k;
  }
};

ControlSpec parse_control(const json& j, std::size_t index, int dim, const Vector& period) {
  if (!j.is_object()) fail("each control must be an object");
  const std::string tag = "controls[" + std::to_string(index) + "]";
  ControlSpec spec;
  spec.label = j.contains("label") ? j.at("label").get<std::string>() : "control" + std::to_string(index);

  const json sigma = j.value("sigma", json(0.0));
  if (sigma.is_array()) {
    if (static_cast<int>(sigma.size()) != dim) fail("'" + tag + ".sigma' must have N rows");
    spec.sigma_cols = -1;
    for (const json& row : sigma) {
      if (!row.is_array() || row.empty()) fail("'" + tag + ".sigma' rows must be non-empty arrays");
      if (spec.sigma_cols >= 0 && static_cast<int>(row.size()) != spec.sigma_cols)
        fail("'" + tag + ".sigma' rows must have equal length");
      spec.sigma_cols = static_cast<int>(row.size());
      for (const json& entry : row) spec.sigma.push_back(parse_expression(entry, tag + ".sigma", dim, period));
    }
  } else {
    const Expression s = parse_expression(sigma, tag + ".sigma", dim, period);
    spec.sigma_cols = dim;
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        spec.sigma.push_back(r == c ? s : constant_expression(dim, 0.0));
  }

  const json drift = j.value("b", json(0.0));
  if (drift.is_array()) {
    if (static_cast<int>(drift.size()) != dim) fail("'" + tag + ".b' must have N entries");
    for (const json& entry : drift) spec.drift.push_back(parse_expression(entry, tag + ".b", dim, period));
  } else {
    spec.drift.assign(static_cast<std::size_t>(dim), parse_expression(drift, tag + ".b", dim, period));
  }
  spec.reaction = parse_expression(j.value("c", json(0.0)), tag + ".c", dim, period);
  spec.source = parse_expression(j.value("f", json(0.0)), tag + ".f", dim, period);
  return spec;
}

LoadedProblem build_problem(const json& doc) {
  if (!doc.is_object()) fail("problem document must be a JSON object");
  const int dim = parse_dim(doc);
  const Vector period = parse_period(doc, dim);
  const double horizon = parse_horizon(doc);

  const json& controls = required(doc, "controls");
  if (!controls.is_array() || controls.empty()) fail("'controls' must be a non-empty array");
  std::vector<ControlSpec> specs;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    specs.push_back(parse_control(controls[i], i, dim, period));
    labels.push_back(specs.back().label);
  }
  ControlSet control_set = [&] {
    try {
      return ControlSet(labels);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }();
  bool time_dependent = false;
  for (const ControlSpec& s : specs) time_dependent = time_dependent || s.time_dependent();

  LoadedProblem out;
  if (doc.contains("manufactured")) {
    const json& m = doc.at("manufactured");
    const Expression solution = parse_expression(required(m, "solution"), "manufactured.solution", dim, period);
    if (!solution.smooth) fail("'manufactured.solution' must be 'sin_sum' or 'const'");
    const json& slack = required(m, "slack");
    if (!slack.is_array() || slack.size() != specs.size())
      fail("'manufactured.slack' must have one entry per control");
    std::vector<Expression> g;
    for (const json& s : slack) g.push_back(parse_expression(s, "manufactured.slack", dim, period));

    OperatorFn op = [specs, dim](std::size_t a, double t, const Vector& x) {
      return specs.at(a).evaluate(dim, t, x);
    };
    SlackFn slack_fn = [g](std::size_t a, double t, const Vector& x) { return g.at(a).value(t, x); };
    try {
      ManufacturedProblem mp =
          manufacture(dim, control_set, op, slack_fn, *solution.smooth, horizon, period);
      out.problem = mp.problem;
    } catch (const std::invalid_argument& e) {
      fail(std::string("manufactured problem: ") + e.what());
    }
    out.exact = solution.value;
  } else {
    if (!doc.contains("u0")) fail("missing key 'u0'");
    const Expression u0 = parse_expression(doc.at("u0"), "u0", dim, period);
    HjbProblem& p = out.problem;
    p.dim = dim;
    p.controls = control_set;
    p.horizon = horizon;
    p.period = period;
    p.initial = [v = u0.value](const Vector& x) { return v(0.0, x); };
    p.coefficients.time_dependent = time_dependent;
    p.coefficients.evaluate = [specs, dim](std::size_t a, double t, const Vector& x) {
      return specs.at(a).evaluate(dim, t, x);
    };
    if (doc.contains("exact")) out.exact = parse_expression(doc.at("exact"), "exact", dim, period).value;
  }
  if (doc.contains("scheme")) {
    const json& s = doc.at("scheme");
    if (!s.is_object()) fail("'scheme' must be an object");
    if (s.contains("theta")) out.scheme.theta = number(s.at("theta"), "scheme.theta");
    if (s.contains("nx")) {
      if (!s.at("nx").is_number_integer()) fail("'scheme.nx' must be an integer");
      out.scheme.nx = s.at("nx").get<int>();
    }
    if (s.contains("dt")) out.scheme.dt = number(s.at("dt"), "scheme.dt");
    if (s.contains("cfl_factor")) out.scheme.cfl_factor = number(s.at("cfl_factor"), "scheme.cfl_factor");
    if (s.contains("stencil")) out.scheme.stencil = s.at("stencil").get<std::string>();
  }
  try {
    out.problem.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return out;
}

Matrix parse_square(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail("'" + key + "' must be a non-empty array of rows");
  const int n = static_cast<int>(j.size());
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) fail("'" + key + "' must be square");
    for (int c = 0; c < n; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], key);
  }
  return m;
}

ControlFamily parse_family(const json& j, int dim, std::size_t index) {
  const std::string tag = "families[" + std::to_string(index) + "]";
  if (!j.is_array() || j.empty()) fail("'" + tag + "' must be a non-empty array");
  ControlFamily family;
  for (const json& member : j) {
    if (!member.is_object()) fail("'" + tag + "' entries must be objects");
    DiffusionControl c;
    const json& a = required(member, "a");
    if (a.is_number()) {
      c.diffusion = number(a, tag + ".a") * Matrix::Identity(dim, dim);
    } else {
      c.diffusion = parse_square(a, tag + ".a");
      if (c.diffusion.rows() != dim) fail("'" + tag + ".a' must be N x N");
    }
    c.source = number_or(member, "f", 0.0);
    family.push_back(c);
  }
  return family;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: file not found: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

LoadedProblem parse_problem(const std::string& json_text) {
  const json doc = parse_json(json_text);
  try {
    return build_problem(doc);
  } catch (const json::exception& e) {
    fail(std::string("invalid value: ") + e.what());
  }
}

LoadedProblem load_problem_file(const std::string& path) {
  return parse_problem(read_text_file(path));
}

std::vector<std::vector<std::size_t>> load_modes_file(const std::string& path,
                                                      const HjbProblem& problem) {
  const json doc = parse_json(read_text_file(path));
  const json& modes = doc.is_array() ? doc : required(doc, "modes");
  if (!modes.is_array() || modes.empty()) fail("'modes' must be a non-empty array");
  std::vector<std::vector<std::size_t>> out;
  for (const json& mode : modes) {
    if (!mode.is_array() || mode.empty()) fail("each mode must be a non-empty array of controls");
    std::vector<std::size_t> subset;
    for (const json& entry : mode) {
      if (entry.is_number_integer()) {
        const long i = entry.get<long>();
        if (i < 0 || static_cast<std::size_t>(i) >= problem.controls.count())
          fail("mode refers to control index " + std::to_string(i) + " which does not exist");
        subset.push_back(static_cast<std::size_t>(i));
      } else if (entry.is_string()) {
        const std::string label = entry.get<std::string>();
        const std::vector<std::string>& labels = problem.controls.labels();
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) fail("mode refers to unknown control '" + label + "'");
        subset.push_back(static_cast<std::size_t>(it - labels.begin()));
      } else {
        fail("mode entries must be control indices or labels");
      }
    }
    out.push_back(subset);
  }
  return out;
}

SplitProblem parse_split_problem(const std::string& json_text) {
  const json doc = parse_json(json_text);
  try {
    if (!doc.is_object()) fail("split document must be a JSON object");
    SplitProblem sp;
    sp.dim = parse_dim(doc);
    const Vector period = parse_period(doc, sp.dim);
    if ((period.array() != period[0]).any()) fail("split problems need the same period in every dimension");
    sp.period = period[0];
    sp.horizon = parse_horizon(doc);
    const Expression u0 = parse_expression(required(doc, "u0"), "u0", sp.dim, period);
    sp.initial = [v = u0.value](const Vector& x) { return v(0.0, x); };
    const json& families = required(doc, "families");
    if (!families.is_array() || families.size() != 2) fail("'families' must hold exactly two families");
    sp.first = parse_family(families[0], sp.dim, 0);
    sp.second = parse_family(families[1], sp.dim, 1);
    try {
      sp.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    return sp;
  } catch (const json::exception& e) {
    fail(std::string("invalid value: ") + e.what());
  }
}

SplitProblem load_split_file(const std::string& path) {
  return parse_split_problem(read_text_file(path));
}

Matrix parse_matrix(const std::string& json_text) {
  const json doc = parse_json(json_text);
  return parse_square(doc.is_object() ? required(doc, "matrix") : doc, "matrix");
}

Matrix load_matrix_file(const std::string& path) { return parse_matrix(read_text_file(path)); }

}  // namespace hjb
