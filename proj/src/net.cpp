#include "thor/net.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace thor {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kIdentity:
      return z;
  }
  return z;
}

// Derivative expressed through the pre-activation.
double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

size_t layer_size(const DenseLayer& l) { return static_cast<size_t>(l.weight.size() + l.bias.size()); }

// Row-major weight then bias.
template <typename Layers>
auto& flat_ref(Layers& layers, size_t flat) {
  for (auto& l : layers) {
    const size_t w = static_cast<size_t>(l.weight.size());
    if (flat < w) {
      const auto cols = static_cast<size_t>(l.weight.cols());
      return l.weight(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols));
    }
    flat -= w;
    if (flat < static_cast<size_t>(l.bias.size())) return l.bias(static_cast<Eigen::Index>(flat));
    flat -= static_cast<size_t>(l.bias.size());
  }
  throw InvalidArgument("parameter index out of range");
}

bool layers_finite(const std::vector<DenseLayer>& layers) {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

DenseModel::DenseModel(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  if (layers_.empty()) throw InvalidArgument("invalid architecture: model needs at least one layer");
  for (size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rows() < 1 || l.weight.cols() < 1) {
      throw InvalidArgument("invalid architecture: empty weight matrix at layer " + std::to_string(i));
    }
    if (l.bias.size() != l.weight.rows()) {
      throw ShapeError("bias length does not match weight rows at layer " + std::to_string(i));
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + " input width does not chain");
    }
  }
  if (!layers_finite(layers_)) throw NumericFault("model parameters must be finite");
}

std::vector<int> DenseModel::hidden_widths() const {
  std::vector<int> w;
  for (size_t i = 0; i + 1 < layers_.size(); ++i) w.push_back(static_cast<int>(layers_[i].weight.rows()));
  return w;
}

size_t DenseModel::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers_) n += layer_size(l);
  return n;
}

double DenseModel::parameter(size_t flat) const {
  return flat_ref(layers_, flat);
}

double& DenseModel::locate(size_t flat) { return flat_ref(layers_, flat); }

void DenseModel::set_parameter(size_t flat, double value) {
  locate(flat) = value;
  ++version_;
}

bool DenseModel::all_finite() const { return layers_finite(layers_); }

bool operator==(const DenseModel& a, const DenseModel& b) {
  if (a.activation_ != b.activation_ || a.layers_.size() != b.layers_.size()) return false;
  for (size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& la = a.layers_[i];
    const auto& lb = b.layers_[i];
    if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
    if (la.weight != lb.weight || la.bias != lb.bias) return false;
  }
  return true;
}

DenseModel init_model(int input_dim, const std::vector<int>& hidden, int output_width,
                      std::uint64_t seed, Activation activation) {
  if (input_dim < 1) throw InvalidArgument("invalid architecture: input dimension must be >= 1");
  if (output_width < 1) throw InvalidArgument("invalid architecture: output width must be >= 1");
  for (int w : hidden) {
    if (w < 1) throw InvalidArgument("invalid architecture: hidden widths must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  int fan_in = input_dim;
  auto add = [&](int out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer l{Eigen::MatrixXd(out, fan_in), Eigen::VectorXd(out)};
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = u(rng);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = u(rng);
    layers.push_back(std::move(l));
    fan_in = out;
  };
  for (int w : hidden) add(w);
  add(output_width);
  return DenseModel(std::move(layers), activation);
}

ForwardResult forward(const DenseModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != m.input_width()) {
    throw ShapeError("input dimension " + std::to_string(x.size()) + " != model input width " +
                     std::to_string(m.input_width()));
  }
  ForwardResult r;
  r.tape.model = &m;
  r.tape.version = m.version();
  const auto& layers = m.layers();
  r.tape.inputs.reserve(layers.size());
  r.tape.pre.reserve(layers.size());
  Eigen::VectorXd a = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    Eigen::VectorXd z = layers[i].weight * a + layers[i].bias;
    r.tape.inputs.push_back(std::move(a));
    if (i + 1 < layers.size()) {
      a = z.unaryExpr([&](double v) { return activate(m.activation(), v); });
    } else {
      a = z;
    }
    r.tape.pre.push_back(std::move(z));
  }
  r.outputs = std::move(a);
  return r;
}

Eigen::VectorXd predict(const DenseModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != m.input_width()) {
    throw ShapeError("input dimension " + std::to_string(x.size()) + " != model input width " +
                     std::to_string(m.input_width()));
  }
  const auto& layers = m.layers();
  Eigen::VectorXd a = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    Eigen::VectorXd z = layers[i].weight * a + layers[i].bias;
    if (i + 1 < layers.size()) {
      a = z.unaryExpr([&](double v) { return activate(m.activation(), v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

GradientBuffer::GradientBuffer(const DenseModel& m) {
  grads_.reserve(m.layers().size());
  for (const auto& l : m.layers()) {
    grads_.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                      Eigen::VectorXd::Zero(l.bias.size())});
  }
}

size_t GradientBuffer::parameter_count() const {
  size_t n = 0;
  for (const auto& l : grads_) n += layer_size(l);
  return n;
}

double GradientBuffer::operator[](size_t flat) const {
  return flat_ref(grads_, flat);
}

void GradientBuffer::zero() {
  for (auto& l : grads_) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void GradientBuffer::scale(double s) {
  for (auto& l : grads_) {
    l.weight *= s;
    l.bias *= s;
  }
}

GradientBuffer& GradientBuffer::operator+=(const GradientBuffer& other) {
  if (other.grads_.size() != grads_.size()) throw ShapeError("gradient buffers are not congruent");
  for (size_t i = 0; i < grads_.size(); ++i) {
    if (grads_[i].weight.rows() != other.grads_[i].weight.rows() ||
        grads_[i].weight.cols() != other.grads_[i].weight.cols()) {
      throw ShapeError("gradient buffers are not congruent");
    }
    grads_[i].weight += other.grads_[i].weight;
    grads_[i].bias += other.grads_[i].bias;
  }
  return *this;
}

bool GradientBuffer::all_finite() const { return layers_finite(grads_); }

bool GradientBuffer::congruent_with(const DenseModel& m) const {
  const auto& ml = m.layers();
  if (ml.size() != grads_.size()) return false;
  for (size_t i = 0; i < ml.size(); ++i) {
    if (ml[i].weight.rows() != grads_[i].weight.rows() || ml[i].weight.cols() != grads_[i].weight.cols() ||
        ml[i].bias.size() != grads_[i].bias.size()) {
      return false;
    }
  }
  return true;
}

void backward_accumulate(const DenseModel& m, const Tape& tape,
                         const Eigen::Ref<const Eigen::VectorXd>& d_outputs, GradientBuffer& into) {
  if (tape.model != &m || tape.version != m.version()) {
    throw StaleTape("tape was not recorded on the current model state");
  }
  if (d_outputs.size() != m.output_width()) throw ShapeError("upstream gradient width mismatch");
  if (!into.congruent_with(m)) throw ShapeError("gradient buffer is not congruent with the model");
  const auto& layers = m.layers();
  auto& grads = into.layers();
  Eigen::VectorXd delta = d_outputs;  // dL/dz of the current layer
  for (size_t i = layers.size(); i-- > 0;) {
    if (i + 1 < layers.size()) {
      const auto& z = tape.pre[i];
      for (Eigen::Index r = 0; r < delta.size(); ++r) delta(r) *= activate_grad(m.activation(), z(r));
    }
    grads[i].weight.noalias() += delta * tape.inputs[i].transpose();
    grads[i].bias += delta;
    if (i > 0) delta = layers[i].weight.transpose() * delta;
  }
}

GradientBuffer backward(const DenseModel& m, const Tape& tape,
                        const Eigen::Ref<const Eigen::VectorXd>& d_outputs) {
  GradientBuffer g(m);
  backward_accumulate(m, tape, d_outputs, g);
  return g;
}

void sgd_step(DenseModel& m, const GradientBuffer& g, double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be finite and > 0");
  if (!g.congruent_with(m)) throw ShapeError("gradient buffer is not congruent with the model");
  if (!g.all_finite()) throw NumericFault("non-finite gradient");
  const auto& gl = g.layers();
  for (size_t i = 0; i < m.layers_.size(); ++i) {
    m.layers_[i].weight -= lr * gl[i].weight;
    m.layers_[i].bias -= lr * gl[i].bias;
  }
  ++m.version_;
  if (!m.all_finite()) throw NumericFault("parameters became non-finite after update");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

void save_checkpoint(std::ostream& out, const DenseModel& m) {
  out << kCheckpointHeader << '\n';
  out << "input=" << m.input_width() << " hidden=";
  const auto hidden = m.hidden_widths();
  for (size_t i = 0; i < hidden.size(); ++i) out << (i ? "," : "") << hidden[i];
  out << " output=" << m.output_width() << " activation=" << activation_name(m.activation()) << '\n';
  auto write_row = [&](auto begin_end_size, auto at) {
    for (Eigen::Index i = 0; i < begin_end_size; ++i) out << (i ? " " : "") << format_double(at(i));
    out << '\n';
  };
  for (const auto& l : m.layers()) {
    const auto cols = l.weight.cols();
    write_row(l.weight.size(), [&](Eigen::Index i) { return l.weight(i / cols, i % cols); });
    write_row(l.bias.size(), [&](Eigen::Index i) { return l.bias(i); });
  }
}

DenseModel load_checkpoint(std::istream& in) {
  long line_no = 0;
  std::string line;
  auto next = [&]() -> const std::string& {
    if (!std::getline(in, line)) throw ParseError("checkpoint truncated at line " + std::to_string(line_no + 1), line_no + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next() != kCheckpointHeader) throw ParseError("not a thor-ckpt v1 checkpoint", line_no);

  int input = -1, output = -1;
  std::vector<int> hidden;
  Activation act = Activation::kRelu;
  bool have_act = false;
  try {
    for (const auto& tok : split_ws(next())) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw InvalidArgument("bad architecture token '" + tok + "'");
      const auto key = tok.substr(0, eq);
      const auto val = tok.substr(eq + 1);
      if (key == "input") {
        input = std::stoi(val);
      } else if (key == "output") {
        output = std::stoi(val);
      } else if (key == "activation") {
        act = parse_activation(val);
        have_act = true;
      } else if (key == "hidden") {
        std::istringstream hs(val);
        for (std::string w; std::getline(hs, w, ',');) hidden.push_back(std::stoi(w));
      } else {
        throw InvalidArgument("unknown architecture key '" + key + "'");
      }
    }
  } catch (const std::exception& e) {
    throw ParseError(std::string("checkpoint architecture line: ") + e.what(), line_no);
  }
  if (input < 1 || output < 1 || !have_act) throw ParseError("incomplete architecture line", line_no);

  std::vector<int> widths = hidden;
  widths.push_back(output);
  std::vector<DenseLayer> layers;
  int fan_in = input;
  auto read_values = [&](Eigen::Index expected) {
    const auto toks = split_ws(next());
    if (static_cast<Eigen::Index>(toks.size()) != expected) {
      throw ParseError("checkpoint line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                           " values, got " + std::to_string(toks.size()),
                       line_no);
    }
    std::vector<double> v(toks.size());
    for (size_t i = 0; i < toks.size(); ++i) {
      try {
        v[i] = parse_double(toks[i]);
      } catch (const InvalidArgument& e) {
        throw ParseError("checkpoint line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
    }
    return v;
  };
  for (int out : widths) {
    if (out < 1) throw ParseError("invalid architecture: widths must be >= 1", 2);
    DenseLayer l{Eigen::MatrixXd(out, fan_in), Eigen::VectorXd(out)};
    const auto w = read_values(l.weight.size());
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight(i / fan_in, i % fan_in) = w[static_cast<size_t>(i)];
    const auto b = read_values(l.bias.size());
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = b[static_cast<size_t>(i)];
    layers.push_back(std::move(l));
    fan_in = out;
  }
  return DenseModel(std::move(layers), act);
}

}  // namespace thor
