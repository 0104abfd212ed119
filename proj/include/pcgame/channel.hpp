#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pcgame {

/// Power gains |H_jk^f|^2 (transmitter j to receiver k in bin f) and receiver
/// noise PSDs of a K-user, N-bin frequency-selective interference channel.
/// Immutable once constructed; the constructor enforces positive direct
/// gains and positive noise.
class ChannelRealization {
 public:
  /// `gain` is laid out [j][k][f] and `noise` [k][f], both row-major.
  ChannelRealization(std::size_t num_users, std::size_t num_bins,
                     std::vector<double> gain, std::vector<double> noise);

  std::size_t num_users() const noexcept { return users_; }
  std::size_t num_bins() const noexcept { return bins_; }

  double gain(std::size_t tx, std::size_t rx, std::size_t bin) const {
    return gain_[(tx * users_ + rx) * bins_ + bin];
  }
  double noise(std::size_t rx, std::size_t bin) const { return noise_[rx * bins_ + bin]; }

  const std::vector<double>& gain_data() const noexcept { return gain_; }
  const std::vector<double>& noise_data() const noexcept { return noise_; }

  friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;

 private:
  std::size_t users_;
  std::size_t bins_;
  std::vector<double> gain_;
  std::vector<double> noise_;
};

/// Channel in the receiver-normalized form used by every solver:
/// noise_norm(k, f) = sigma_k^f / |H_kk^f|^2 and
/// cross(j, k, f) = |H_jk^f|^2 / |H_kk^f|^2 (zero when j == k).
class NormalizedChannel {
 public:
  /// `noise_norm` is [k][f]; `cross` is [j][k][f]. Diagonal entries of
  /// `cross` are ignored and stored as zero.
  NormalizedChannel(std::size_t num_users, std::size_t num_bins,
                    std::vector<double> noise_norm, std::vector<double> cross);

  std::size_t num_users() const noexcept { return users_; }
  std::size_t num_bins() const noexcept { return bins_; }

  double noise_norm(std::size_t user, std::size_t bin) const { return noise_[user * bins_ + bin]; }
  double cross(std::size_t tx, std::size_t rx, std::size_t bin) const {
    return cross_[(tx * users_ + rx) * bins_ + bin];
  }

  friend bool operator==(const NormalizedChannel&, const NormalizedChannel&) = default;

 private:
  std::size_t users_;
  std::size_t bins_;
  std::vector<double> noise_;
  std::vector<double> cross_;
};

NormalizedChannel normalize(const ChannelRealization& ch);

/// Largest singular value of the hollow K x K matrix A^f with
/// [A^f]_ij = cross(i, j, f).
double coupling_norm(const NormalizedChannel& nc, std::size_t bin);

/// True iff coupling_norm(nc, f) < 1 for every bin: the condition under which
/// the game has a unique Nash equilibrium reached by iterative water-filling.
bool is_diagonally_dominant(const NormalizedChannel& nc);

/// Tapped-delay-line Rayleigh model with an exponential power-delay profile.
struct RayleighProfile {
  std::size_t num_rays = 4;
  double ray_spacing = 160e-9;     // seconds
  double bandwidth = 6.25e6;       // Hz
  double decay_constant = 160e-9;  // seconds; e-folding time of ray power

  void validate() const;
  /// Ray variances summing to `total_power`.
  std::vector<double> ray_variances(double total_power) const;
};

/// Users, bins, receiver noise and the total ray power of every ordered link.
struct Topology {
  std::size_t num_users = 2;
  std::size_t num_bins = 20;
  double noise = 0.01;
  std::vector<double> link_power;  // [j][k], K*K entries

  static Topology uniform(std::size_t users, std::size_t bins, double direct_power,
                          double cross_power, double noise);

  double power(std::size_t tx, std::size_t rx) const { return link_power[tx * num_users + rx]; }
  void validate() const;
};

/// Draws one realization. Each ordered link (j, k) uses its own random stream
/// derived from (seed, j, k), so the result does not depend on draw order.
ChannelRealization generate_channel(const RayleighProfile& profile, const Topology& topology,
                                    std::uint64_t seed);

struct AdmissibleDraw {
  ChannelRealization channel;
  std::size_t rejections = 0;
};

/// Rejection-samples generate_channel until the draw is diagonally dominant.
/// Attempt i uses seed derive_seed(seed, i). Throws SolverError after
/// `max_rejections` rejected draws.
AdmissibleDraw sample_admissible_channel(const RayleighProfile& profile, const Topology& topology,
                                         std::uint64_t seed, std::size_t max_rejections = 10000);

}  // namespace pcgame
