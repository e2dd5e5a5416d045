#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "thor/error.hpp"

namespace thor {

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Feedforward network: hidden layers apply the activation, the last layer is
// affine. Parameters are addressed in a flat order: layer by layer, weights
// row-major then bias. This order is shared by GradientBuffer and the
// checkpoint format.
class DenseModel {
 public:
  DenseModel(std::vector<DenseLayer> layers, Activation activation);

  Eigen::Index input_width() const { return layers_.front().weight.cols(); }
  Eigen::Index output_width() const { return layers_.back().weight.rows(); }
  std::vector<int> hidden_widths() const;
  Activation activation() const { return activation_; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  size_t parameter_count() const;

  double parameter(size_t flat) const;
  void set_parameter(size_t flat, double value);

  // Bumped on every mutation; tapes recorded before a bump are stale.
  std::uint64_t version() const { return version_; }

  bool all_finite() const;

  friend bool operator==(const DenseModel& a, const DenseModel& b);

 private:
  friend void sgd_step(DenseModel& m, const class GradientBuffer& g, double lr);

  double& locate(size_t flat);

  std::vector<DenseLayer> layers_;
  Activation activation_;
  std::uint64_t version_ = 0;
};

DenseModel init_model(int input_dim, const std::vector<int>& hidden, int output_width,
                      std::uint64_t seed, Activation activation = Activation::kRelu);

// Intermediates retained by forward() for the backward pass.
struct Tape {
  const DenseModel* model = nullptr;
  std::uint64_t version = 0;
  std::vector<Eigen::VectorXd> inputs;  // input to each layer
  std::vector<Eigen::VectorXd> pre;     // pre-activation of each layer
};

struct ForwardResult {
  Eigen::VectorXd outputs;
  Tape tape;
};

ForwardResult forward(const DenseModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);
// Output only, no tape.
Eigen::VectorXd predict(const DenseModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

class GradientBuffer {
 public:
  explicit GradientBuffer(const DenseModel& m);

  const std::vector<DenseLayer>& layers() const { return grads_; }
  std::vector<DenseLayer>& layers() { return grads_; }

  size_t parameter_count() const;
  double operator[](size_t flat) const;

  void zero();
  void scale(double s);
  GradientBuffer& operator+=(const GradientBuffer& other);
  bool all_finite() const;
  bool congruent_with(const DenseModel& m) const;

 private:
  std::vector<DenseLayer> grads_;
};

// Gradient of a scalar loss w.r.t. the parameters given the loss gradient
// w.r.t. the outputs. Rectifier subgradient at zero is 0.
GradientBuffer backward(const DenseModel& m, const Tape& tape,
                        const Eigen::Ref<const Eigen::VectorXd>& d_outputs);
void backward_accumulate(const DenseModel& m, const Tape& tape,
                         const Eigen::Ref<const Eigen::VectorXd>& d_outputs, GradientBuffer& into);

// params -= lr * grads. Throws NumericFault on non-finite gradients, leaving
// the model untouched.
void sgd_step(DenseModel& m, const GradientBuffer& g, double lr);

// Text checkpoint. Numbers use shortest round-trip formatting so a
// save/load cycle reproduces every parameter bit for bit.
inline constexpr std::string_view kCheckpointHeader = "thor-ckpt v1";
void save_checkpoint(std::ostream& out, const DenseModel& m);
// Reads the header, architecture line and tensors; leaves the stream after
// the last tensor line.
DenseModel load_checkpoint(std::istream& in);

std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace thor
