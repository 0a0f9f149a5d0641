#pragma once

#include "ltm/common.hpp"
#include "ltm/sample_set.hpp"
#include "ltm/tensor3.hpp"

namespace ltm {

/// (1/N) sum y_a y_b^T with its source pair.
struct SecondMoment {
  Matrix m;
  int a = -1;
  int b = -1;
  long n = 0;
};

/// (1/N) sum y_a (x) y_b (x) y_c with its source triple.
struct ThirdMoment {
  Tensor3 t;
  int a = -1, b = -1, c = -1;
  long n = 0;
};

SecondMoment pairwise_moment(const SampleSet& samples, int a, int b);
ThirdMoment triplet_moment(const SampleSet& samples, int a, int b, int c);
Vector mean_moment(const SampleSet& samples, int a);

/// Uniform access to first, second and third order moments of the observed
/// variables; implemented by empirical samples and by the exact-model oracle.
/// Implementations must be safe to call from many workers at once.
class MomentSource {
 public:
  virtual ~MomentSource() = default;
  virtual int observed_count() const = 0;
  virtual int dim(int v) const = 0;
  virtual Vector mean(int a) const = 0;
  virtual Matrix pair(int a, int b) const = 0;
  virtual Tensor3 triple(int a, int b, int c) const = 0;
};

class SampleMoments final : public MomentSource {
 public:
  explicit SampleMoments(const SampleSet& samples) : samples_(samples) {}
  int observed_count() const override { return samples_.variable_count(); }
  int dim(int v) const override { return samples_.dim(v); }
  Vector mean(int a) const override { return mean_moment(samples_, a); }
  Matrix pair(int a, int b) const override {
    return pairwise_moment(samples_, a, b).m;
  }
  Tensor3 triple(int a, int b, int c) const override {
    return triplet_moment(samples_, a, b, c).t;
  }

 private:
  const SampleSet& samples_;
};

}  // namespace ltm
