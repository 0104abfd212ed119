#include "pcgame/channel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "pcgame/error.hpp"
#include "pcgame/seed.hpp"

namespace pcgame {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

ChannelRealization::ChannelRealization(std::size_t num_users, std::size_t num_bins,
                                       std::vector<double> gain, std::vector<double> noise)
    : users_{num_users}, bins_{num_bins}, gain_{std::move(gain)}, noise_{std::move(noise)} {
  require(users_ >= 1 && bins_ >= 1, "channel: need at least one user and one bin");
  require(gain_.size() == users_ * users_ * bins_, "channel: gain has wrong size");
  require(noise_.size() == users_ * bins_, "channel: noise has wrong size");
  for (double g : gain_) require(std::isfinite(g) && g >= 0.0, "channel: gains must be finite and >= 0");
  for (double s : noise_) require(std::isfinite(s) && s > 0.0, "channel: noise must be finite and > 0");
  for (std::size_t k = 0; k < users_; ++k)
    for (std::size_t f = 0; f < bins_; ++f)
      require(this->gain(k, k, f) > 0.0, "channel: direct gain of user " + std::to_string(k) +
                                       " is zero in bin " + std::to_string(f));
}

NormalizedChannel::NormalizedChannel(std::size_t num_users, std::size_t num_bins,
                                     std::vector<double> noise_norm, std::vector<double> cross)
    : users_{num_users}, bins_{num_bins}, noise_{std::move(noise_norm)}, cross_{std::move(cross)} {
  require(users_ >= 1 && bins_ >= 1, "normalized channel: need at least one user and one bin");
  require(noise_.size() == users_ * bins_, "normalized channel: noise has wrong size");
  require(cross_.size() == users_ * users_ * bins_, "normalized channel: cross has wrong size");
  for (double n : noise_)
    require(std::isfinite(n) && n > 0.0, "normalized channel: noise must be finite and > 0");
  for (double a : cross_)
    require(std::isfinite(a) && a >= 0.0, "normalized channel: cross gains must be finite and >= 0");
  for (std::size_t k = 0; k < users_; ++k)
    for (std::size_t f = 0; f < bins_; ++f) cross_[(k * users_ + k) * bins_ + f] = 0.0;
}

NormalizedChannel normalize(const ChannelRealization& ch) {
  const std::size_t users = ch.num_users();
  const std::size_t bins = ch.num_bins();
  std::vector<double> noise(users * bins);
  std::vector<double> cross(users * users * bins, 0.0);
  for (std::size_t k = 0; k < users; ++k) {
    for (std::size_t f = 0; f < bins; ++f) {
      const double direct = ch.gain(k, k, f);
      noise[k * bins + f] = ch.noise(k, f) / direct;
      for (std::size_t j = 0; j < users; ++j)
        if (j != k) cross[(j * users + k) * bins + f] = ch.gain(j, k, f) / direct;
    }
  }
  return NormalizedChannel(users, bins, std::move(noise), std::move(cross));
}

double coupling_norm(const NormalizedChannel& nc, std::size_t bin) {
  const auto users = static_cast<Eigen::Index>(nc.num_users());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(users, users);
  for (Eigen::Index i = 0; i < users; ++i)
    for (Eigen::Index j = 0; j < users; ++j)
      if (i != j) a(i, j) = nc.cross(static_cast<std::size_t>(i), static_cast<std::size_t>(j), bin);
  if (users == 1) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

bool is_diagonally_dominant(const NormalizedChannel& nc) {
  for (std::size_t f = 0; f < nc.num_bins(); ++f)
    if (!(coupling_norm(nc, f) < 1.0)) return false;
  return true;
}

void RayleighProfile::validate() const {
  require(num_rays >= 1, "profile: num_rays must be >= 1");
  require(ray_spacing > 0.0 && bandwidth > 0.0 && decay_constant > 0.0,
          "profile: spacing, bandwidth and decay constant must be > 0");
}

std::vector<double> RayleighProfile::ray_variances(double total_power) const {
  std::vector<double> var(num_rays);
  double sum = 0.0;
  for (std::size_t m = 0; m < num_rays; ++m) {
    var[m] = std::exp(-static_cast<double>(m) * ray_spacing / decay_constant);
    sum += var[m];
  }
  for (double& v : var) v *= total_power / sum;
  return var;
}

Topology Topology::uniform(std::size_t users, std::size_t bins, double direct_power,
                           double cross_power, double noise) {
  Topology t;
  t.num_users = users;
  t.num_bins = bins;
  t.noise = noise;
  t.link_power.assign(users * users, cross_power);
  for (std::size_t k = 0; k < users; ++k) t.link_power[k * users + k] = direct_power;
  return t;
}

void Topology::validate() const {
  require(num_users >= 2, "topology: need at least two users");
  require(num_bins >= 1, "topology: need at least one bin");
  require(noise > 0.0, "topology: noise must be > 0");
  require(link_power.size() == num_users * num_users, "topology: link_power must be K*K");
  for (std::size_t j = 0; j < num_users; ++j)
    for (std::size_t k = 0; k < num_users; ++k)
      require(j == k ? power(j, k) > 0.0 : power(j, k) >= 0.0,
              "topology: direct link power must be > 0, cross >= 0");
}

ChannelRealization generate_channel(const RayleighProfile& profile, const Topology& topology,
                                    std::uint64_t seed) {
  profile.validate();
  topology.validate();
  const std::size_t users = topology.num_users;
  const std::size_t bins = topology.num_bins;
  const std::size_t rays = profile.num_rays;

  // Phase rotation of ray m in bin f; bin f sits at baseband f/N * bandwidth.
  std::vector<std::complex<double>> steering(bins * rays);
  for (std::size_t f = 0; f < bins; ++f) {
    const double freq = static_cast<double>(f) / static_cast<double>(bins) * profile.bandwidth;
    for (std::size_t m = 0; m < rays; ++m) {
      const double delay = static_cast<double>(m) * profile.ray_spacing;
      steering[f * rays + m] = std::polar(1.0, -2.0 * std::numbers::pi * freq * delay);
    }
  }

  std::vector<double> gain(users * users * bins);
  std::vector<std::complex<double>> taps(rays);
  for (std::size_t j = 0; j < users; ++j) {
    for (std::size_t k = 0; k < users; ++k) {
      std::mt19937_64 rng(derive_seed(seed, j * users + k));
      std::normal_distribution<double> normal(0.0, 1.0);
      const auto var = profile.ray_variances(topology.power(j, k));
      for (std::size_t m = 0; m < rays; ++m) {
        const double scale = std::sqrt(var[m] / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        taps[m] = {scale * re, scale * im};
      }
      for (std::size_t f = 0; f < bins; ++f) {
        std::complex<double> h{0.0, 0.0};
        for (std::size_t m = 0; m < rays; ++m) h += taps[m] * steering[f * rays + m];
        gain[(j * users + k) * bins + f] = std::norm(h);
      }
    }
  }
  std::vector<double> noise(users * bins, topology.noise);
  return ChannelRealization(users, bins, std::move(gain), std::move(noise));
}

AdmissibleDraw sample_admissible_channel(const RayleighProfile& profile, const Topology& topology,
                                         std::uint64_t seed, std::size_t max_rejections) {
  for (std::size_t attempt = 0;; ++attempt) {
    auto ch = generate_channel(profile, topology, derive_seed(seed, attempt));
    if (is_diagonally_dominant(normalize(ch))) return {std::move(ch), attempt};
    if (attempt + 1 >= max_rejections)
      throw SolverError("sample_admissible_channel: no diagonally dominant draw after " +
                        std::to_string(attempt + 1) + " rejections");
  }
}


}  // namespace pcgame
