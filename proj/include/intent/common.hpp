#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace intent {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Transform = Eigen::Isometry3d;

// Error hierarchy. Each module throws the narrowest type that applies; the
// CLI maps ConfigError/ParameterError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InputShapeError : public Error { using Error::Error; };
class LayoutError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class StreamOrderError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class GenerationError : public Error { using Error::Error; };
class CorpusError : public Error { using Error::Error; };

// Deterministic random source. Uniform and normal draws are computed from raw
// 64-bit engine output so a seed produces the same stream on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double sigma = 1.0);
  std::size_t index(std::size_t n);  // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[index(i)]);
    }
  }

private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// 64-bit FNV-1a, used for provenance hashes in reports and trace headers.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace intent

namespace intent {

enum class Intention : int { Unintentional = 0, Intentional = 1 };

}  // namespace intent
