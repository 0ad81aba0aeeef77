#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace proxsps {

class LayoutMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const Segment&) const = default;
};

// Ordered list of named, contiguous segments covering [0, size()).
class Layout {
 public:
  Layout() = default;

  // Segments are laid out back to back in the given order.
  explicit Layout(std::vector<std::pair<std::string, std::size_t>> parts) {
    std::size_t offset = 0;
    segments_.reserve(parts.size());
    for (auto& [name, length] : parts) {
      for (const auto& s : segments_) {
        if (s.name == name) throw std::invalid_argument("duplicate segment name: " + name);
      }
      segments_.push_back({std::move(name), offset, length});
      offset += length;
    }
    size_ = offset;
  }

  static std::shared_ptr<const Layout> flat(std::size_t n) {
    return std::make_shared<const Layout>(std::vector<std::pair<std::string, std::size_t>>{{"x", n}});
  }

  std::size_t size() const { return size_; }
  const std::vector<Segment>& segments() const { return segments_; }

  const Segment& segment(const std::string& name) const {
    for (const auto& s : segments_) {
      if (s.name == name) return s;
    }
    throw std::out_of_range("no segment named " + name);
  }

  bool operator==(const Layout& other) const {
    return size_ == other.size_ && segments_ == other.segments_;
  }

 private:
  std::vector<Segment> segments_;
  std::size_t size_ = 0;
};

// Flat double-precision parameter array with a shared, immutable layout.
class ParamVector {
 public:
  ParamVector() : layout_(Layout::flat(0)) {}

  explicit ParamVector(std::shared_ptr<const Layout> layout)
      : layout_(std::move(layout)), data_(layout_->size(), 0.0) {}

  ParamVector(std::shared_ptr<const Layout> layout, std::vector<double> data)
      : layout_(std::move(layout)), data_(std::move(data)) {
    if (data_.size() != layout_->size()) {
      throw LayoutMismatch("data length " + std::to_string(data_.size()) +
                           " does not match layout size " + std::to_string(layout_->size()));
    }
  }

  // Single-segment vector, mostly for tests and low-dimensional problems.
  static ParamVector from(std::initializer_list<double> values) {
    return from(std::vector<double>(values));
  }
  static ParamVector from(std::vector<double> values) {
    auto layout = Layout::flat(values.size());
    return ParamVector(std::move(layout), std::move(values));
  }

  static ParamVector zeros_like(const ParamVector& other) { return ParamVector(other.layout_); }

  const std::shared_ptr<const Layout>& layout_ptr() const { return layout_; }
  const Layout& layout() const { return *layout_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> segment(const std::string& name) {
    const auto& s = layout_->segment(name);
    return std::span<double>(data_).subspan(s.offset, s.length);
  }
  std::span<const double> segment(const std::string& name) const {
    const auto& s = layout_->segment(name);
    return std::span<const double>(data_).subspan(s.offset, s.length);
  }

  bool same_layout(const ParamVector& other) const {
    return layout_ == other.layout_ || *layout_ == *other.layout_;
  }

  void require_same_layout(const ParamVector& other) const {
    if (!same_layout(other)) throw LayoutMismatch("parameter vectors have different layouts");
  }

  // this += a * other
  ParamVector& axpy(double a, const ParamVector& other) {
    require_same_layout(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
    return *this;
  }

  ParamVector& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  ParamVector& operator/=(double s) {
    for (double& v : data_) v /= s;
    return *this;
  }
  ParamVector& operator+=(const ParamVector& other) { return axpy(1.0, other); }
  ParamVector& operator-=(const ParamVector& other) { return axpy(-1.0, other); }

  friend ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
  friend ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
  friend ParamVector operator*(double s, ParamVector a) { return a *= s; }
  friend ParamVector operator*(ParamVector a, double s) { return a *= s; }
  friend ParamVector operator/(ParamVector a, double s) { return a /= s; }

  double dot(const ParamVector& other) const {
    require_same_layout(other);
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * other.data_[i];
    return acc;
  }

  double squared_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return acc;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool is_zero() const {
    for (double v : data_) {
      if (v != 0.0) return false;
    }
    return true;
  }

  // Exact element-wise equality including layout.
  bool operator==(const ParamVector& other) const {
    return same_layout(other) && data_ == other.data_;
  }

 private:
  std::shared_ptr<const Layout> layout_;
  std::vector<double> data_;
};

inline double dot(const ParamVector& a, const ParamVector& b) { return a.dot(b); }

inline double distance(const ParamVector& a, const ParamVector& b) { return (a - b).norm(); }

inline double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  a.require_same_layout(b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace proxsps
