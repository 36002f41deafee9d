#include "nmc/kernel.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <utility>

#include "nmc/rng.hpp"

namespace nmc {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) { fnv_bytes(h, &v, sizeof v); }

void fnv_double(std::uint64_t& h, double v) {
  fnv_u64(h, std::bit_cast<std::uint64_t>(v));
}

void fnv_doubles(std::uint64_t& h, const std::vector<double>& v) {
  fnv_u64(h, v.size());
  for (double x : v) fnv_double(h, x);
}

std::uint64_t fingerprint_of(const StateSpace& space,
                             const std::variant<ConstantFamily, AffineMixtureFamily,
                                                PolynomialFamily>& family) {
  std::uint64_t h = kFnvOffset;
  fnv_u64(h, static_cast<std::uint64_t>(space.size()));
  fnv_u64(h, family.index());
  if (const auto* c = std::get_if<ConstantFamily>(&family)) {
    fnv_doubles(h, c->matrix.data());
  } else if (const auto* a = std::get_if<AffineMixtureFamily>(&family)) {
    fnv_doubles(h, a->base.data());
    fnv_doubles(h, a->feedback.data());
    fnv_double(h, a->lambda);
  } else {
    const auto* p = std::get_if<PolynomialFamily>(&family);
    fnv_doubles(h, p->constant_block);
    fnv_u64(h, p->degree_blocks.size());
    for (const auto& block : p->degree_blocks) fnv_doubles(h, block);
  }
  return h;
}

// Construction-time sanity: the family must be well-posed at least on the
// simplex vertices and the barycenter. The exhaustive sweep is
// minorization_bound.
void check_corner_wellposedness(const NonlinearKernel& kernel) {
  const int d = kernel.space().size();
  for (int x = 0; x < d; ++x) evaluate(kernel, vertex(d, x));
  evaluate(kernel, barycenter(d));
}

}  // namespace

NonlinearKernel::NonlinearKernel(StateSpace space, ConstantFamily family)
    : space_(std::move(space)), family_(std::move(family)) {
  const auto& c = std::get<ConstantFamily>(family_);
  if (c.matrix.size() != space_.size()) {
    throw DimensionMismatch("NonlinearKernel: matrix size " +
                            std::to_string(c.matrix.size()) +
                            " vs state space " + std::to_string(space_.size()));
  }
  fingerprint_ = fingerprint_of(space_, family_);
  check_corner_wellposedness(*this);
}

NonlinearKernel::NonlinearKernel(StateSpace space, AffineMixtureFamily family)
    : space_(std::move(space)), family_(std::move(family)) {
  const auto& a = std::get<AffineMixtureFamily>(family_);
  if (a.base.size() != space_.size() || a.feedback.size() != space_.size()) {
    throw DimensionMismatch("NonlinearKernel: base/feedback size vs state space " +
                            std::to_string(space_.size()));
  }
  if (!(a.lambda >= 0.0 && a.lambda <= 1.0)) {
    throw Error("NonlinearKernel: lambda = " + std::to_string(a.lambda) +
                " outside [0,1]");
  }
  fingerprint_ = fingerprint_of(space_, family_);
  check_corner_wellposedness(*this);
}

NonlinearKernel::NonlinearKernel(StateSpace space, PolynomialFamily family)
    : space_(std::move(space)), family_(std::move(family)) {
  const auto& p = std::get<PolynomialFamily>(family_);
  const std::size_t d = static_cast<std::size_t>(space_.size());
  if (p.constant_block.size() != d * d) {
    throw DimensionMismatch("NonlinearKernel: constant block has " +
                            std::to_string(p.constant_block.size()) +
                            " entries, want " + std::to_string(d * d));
  }
  for (std::size_t i = 0; i < p.degree_blocks.size(); ++i) {
    if (p.degree_blocks[i].size() != d * d * d) {
      throw DimensionMismatch("NonlinearKernel: degree-" + std::to_string(i + 1) +
                              " block has " +
                              std::to_string(p.degree_blocks[i].size()) +
                              " entries, want " + std::to_string(d * d * d));
    }
  }
  fingerprint_ = fingerprint_of(space_, family_);
  check_corner_wellposedness(*this);
}

const char* NonlinearKernel::family_name() const {
  switch (family_.index()) {
    case 0: return "constant";
    case 1: return "affine_mixture";
    default: return "polynomial";
  }
}

bool NonlinearKernel::is_affine() const {
  return std::holds_alternative<ConstantFamily>(family_) ||
         std::holds_alternative<AffineMixtureFamily>(family_);
}

std::string NonlinearKernel::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fingerprint_));
  return std::string(buf);
}

StochasticMatrix evaluate(const NonlinearKernel& kernel, const MeasureVector& mu) {
  const int d = kernel.space().size();
  if (mu.size() != d) {
    throw DimensionMismatch("evaluate: measure size " + std::to_string(mu.size()) +
                            " vs state space " + std::to_string(d));
  }
  if (const auto* c = kernel.as_constant()) {
    return c->matrix;
  }
  const std::size_t n = static_cast<std::size_t>(d);
  if (const auto* a = kernel.as_affine_mixture()) {
    const MeasureVector feedback_row = push_forward(mu, a->feedback);
    std::vector<double> rows(n * n);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        rows[x * n + y] = (1.0 - a->lambda) * a->base(static_cast<int>(x),
                                                      static_cast<int>(y)) +
                          a->lambda * feedback_row[static_cast<int>(y)];
      }
    }
    return StochasticMatrix(std::move(rows), d);
  }
  const auto* p = kernel.as_polynomial();
  // mu(z)^deg for deg = 1..D, laid out degree-major
  const std::size_t degrees = p->degree_blocks.size();
  std::vector<double> powers(degrees * n);
  for (std::size_t z = 0; z < n; ++z) {
    double pw = 1.0;
    for (std::size_t deg = 0; deg < degrees; ++deg) {
      pw *= mu[static_cast<int>(z)];
      powers[deg * n + z] = pw;
    }
  }
  std::vector<double> rows(p->constant_block);
  for (std::size_t deg = 0; deg < degrees; ++deg) {
    const auto& block = p->degree_blocks[deg];
    for (std::size_t xy = 0; xy < n * n; ++xy) {
      double acc = 0.0;
      for (std::size_t z = 0; z < n; ++z) acc += block[xy * n + z] * powers[deg * n + z];
      rows[xy] += acc;
    }
  }
  return StochasticMatrix(std::move(rows), d);
}

std::vector<MeasureVector> simplex_grid(int d, int resolution) {
  if (d < 1 || resolution < 1) {
    throw Error("simplex_grid: need d >= 1 and resolution >= 1");
  }
  // grid size is C(resolution + d - 1, d - 1); refuse absurd sweeps
  double count = 1.0;
  for (int i = 1; i < d; ++i) {
    count *= static_cast<double>(resolution + i) / static_cast<double>(i);
    if (count > 5e6) {
      throw TooLarge("simplex_grid: more than 5e6 points for d=" +
                     std::to_string(d) + ", resolution=" +
                     std::to_string(resolution));
    }
  }
  std::vector<MeasureVector> grid;
  std::vector<int> parts(static_cast<std::size_t>(d), 0);
  const double scale = 1.0 / static_cast<double>(resolution);
  // lexicographic enumeration of compositions of `resolution` into d parts
  auto emit = [&] {
    std::vector<double> w(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) w[static_cast<std::size_t>(i)] = parts[static_cast<std::size_t>(i)] * scale;
    grid.emplace_back(std::move(w));
  };
  auto recurse = [&](auto&& self, int index, int remaining) -> void {
    if (index == d - 1) {
      parts[static_cast<std::size_t>(index)] = remaining;
      emit();
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      parts[static_cast<std::size_t>(index)] = take;
      self(self, index + 1, remaining - take);
    }
  };
  recurse(recurse, 0, resolution);
  return grid;
}

MinorizationReport minorization_bound(const NonlinearKernel& kernel,
                                      int grid_resolution,
                                      int extra_samples,
                                      std::uint64_t seed) {
  if (grid_resolution < 1) {
    throw Error("minorization_bound: grid_resolution must be >= 1");
  }
  const int d = kernel.space().size();
  MinorizationReport report;
  report.grid_resolution = grid_resolution;

  auto scan = [&](const MeasureVector& mu) {
    const StochasticMatrix P = evaluate(kernel, mu);
    ++report.samples;
    for (int x = 0; x < d; ++x) {
      for (int y = 0; y < d; ++y) {
        if (report.samples == 1 && x == 0 && y == 0) {
          report.lower_bound_estimate = P(0, 0);
          report.argmin_measure = mu;
        }
        if (P(x, y) < report.lower_bound_estimate) {
          report.lower_bound_estimate = P(x, y);
          report.argmin_measure = mu;
          report.argmin_x = x;
          report.argmin_y = y;
        }
      }
    }
  };

  if (kernel.is_affine()) {
    // entries are affine in mu, so the infimum over the simplex is attained
    // at a vertex; the sweep is exact
    for (int x = 0; x < d; ++x) scan(vertex(d, x));
    report.exact = true;
    return report;
  }

  for (const MeasureVector& mu : simplex_grid(d, grid_resolution)) scan(mu);
  std::mt19937_64 eng(seed);
  for (int i = 0; i < extra_samples; ++i) scan(random_simplex_point(d, eng));
  report.exact = false;
  return report;
}

}  // namespace nmc
