#include "ddrbf/diffeo_net.hpp"

#include <string>

#include "ddrbf/errors.hpp"

namespace ddrbf {

DiffeoNet::DiffeoNet(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("net dimension must be >= 1");
}

DiffeoNet::DiffeoNet(int dim, std::vector<RbfLayer> layers) : DiffeoNet(dim) {
  layers_.reserve(layers.size());
  for (auto& layer : layers) push_back(std::move(layer));
}

void DiffeoNet::push_back(RbfLayer layer) {
  if (layer.dim() != dim_) {
    throw ArgumentError("layer dimension " + std::to_string(layer.dim()) +
                        " does not match net dimension " + std::to_string(dim_));
  }
  layers_.push_back(std::move(layer));
}

void DiffeoNet::check_input(const Vec& x) const {
  if (x.size() != dim_) {
    throw ArgumentError("net input has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(dim_));
  }
}

Vec DiffeoNet::forward(const Vec& x) const {
  check_input(x);
  Vec z = x;
  for (const auto& layer : layers_) z = layer.forward(z);
  return z;
}

std::vector<Vec> DiffeoNet::trajectory(const Vec& x) const {
  check_input(x);
  std::vector<Vec> states;
  states.reserve(layers_.size() + 1);
  states.push_back(x);
  for (const auto& layer : layers_) states.push_back(layer.forward(states.back()));
  return states;
}

Mat DiffeoNet::jacobian(const Vec& x) const {
  check_input(x);
  Mat jac = Mat::Identity(dim_, dim_);
  Vec z = x;
  for (const auto& layer : layers_) {
    jac = layer.jacobian(z) * jac;
    z = layer.forward(z);
  }
  return jac;
}

std::pair<Vec, Vec> DiffeoNet::forward_tangent(const Vec& x, const Vec& v) const {
  check_input(x);
  check_input(v);
  Vec z = x;
  Vec t = v;
  for (const auto& layer : layers_) {
    t += layer.weights() * (layer.activation_gradients(z) * t);
    z = layer.forward(z);
  }
  return {z, t};
}

Vec DiffeoNet::inverse(const Vec& y, double tol, int max_iter) const {
  check_input(y);
  Vec x = y;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) x = it->inverse(x, tol, max_iter);
  return x;
}

}  // namespace ddrbf
