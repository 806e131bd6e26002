#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "lss/format.hpp"
#include "lss/sim.hpp"

namespace lss::sim {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " from '" +
                                std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double noise_trace(const NoiseModel& noise, std::span<const double> profile, int antennas) {
  if (const auto* cal = std::get_if<Calibrated>(&noise)) return cal->variance * antennas;
  double t = 0.0;
  for (double v : profile) t += v;
  return t;
}

// Per-antenna noise variances for one trial.
std::vector<double> draw_noise_profile(const NoiseModel& noise, int antennas,
                                       RandomStream& profile_stream) {
  std::vector<double> profile(static_cast<std::size_t>(antennas));
  if (const auto* cal = std::get_if<Calibrated>(&noise)) {
    std::fill(profile.begin(), profile.end(), cal->variance);
  } else {
    const auto& unc = std::get<Uncalibrated>(noise);
    for (auto& v : profile) v = profile_stream.uniform(unc.lo, unc.hi);
  }
  return profile;
}

std::vector<std::complex<double>> draw_noise(int antennas, int samples,
                                             std::span<const double> profile,
                                             RandomStream& noise_stream) {
  std::vector<std::complex<double>> y(static_cast<std::size_t>(antennas) *
                                      static_cast<std::size_t>(samples));
  for (int m = 0; m < antennas; ++m) {
    for (int l = 0; l < samples; ++l) {
      y[static_cast<std::size_t>(m) * samples + l] = noise_stream.complex_normal(profile[m]);
    }
  }
  return y;
}

}  // namespace

void validate(const ChannelModel& channel) {
  if (const auto* exp = std::get_if<ExponentialCorrelated>(&channel)) {
    if (!(exp->rho >= 0.0 && exp->rho < 1.0)) {
      throw std::invalid_argument("exponential correlation needs rho in [0, 1)");
    }
  }
}

void validate(const NoiseModel& noise) {
  if (const auto* cal = std::get_if<Calibrated>(&noise)) {
    if (!(cal->variance > 0.0) || !std::isfinite(cal->variance)) {
      throw std::invalid_argument("calibrated noise variance must be positive");
    }
  } else {
    const auto& unc = std::get<Uncalibrated>(noise);
    if (!(unc.lo > 0.0) || !(unc.lo <= unc.hi) || !std::isfinite(unc.hi)) {
      throw std::invalid_argument("uncalibrated noise needs 0 < lo <= hi");
    }
  }
}

std::string describe(const ChannelModel& channel) {
  if (const auto* exp = std::get_if<ExponentialCorrelated>(&channel)) {
    return "exp:" + format_double(exp->rho, -1);
  }
  return "uncorrelated";
}

std::string describe(const NoiseModel& noise) {
  if (const auto* cal = std::get_if<Calibrated>(&noise)) {
    return "calibrated:" + format_double(cal->variance, -1);
  }
  const auto& unc = std::get<Uncalibrated>(noise);
  return "uncalibrated:" + format_double(unc.lo, -1) + ":" + format_double(unc.hi, -1);
}

ChannelModel parse_channel(std::string_view text) {
  if (text == "uncorrelated") return Uncorrelated{};
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "exp") {
    ChannelModel model = ExponentialCorrelated{parse_number(parts[1], "rho")};
    validate(model);
    return model;
  }
  throw std::invalid_argument("channel must be 'uncorrelated' or 'exp:<rho>', got '" +
                              std::string(text) + "'");
}

NoiseModel parse_noise(std::string_view text) {
  const auto parts = split(text, ':');
  NoiseModel model;
  if (parts.size() == 2 && parts[0] == "calibrated") {
    model = Calibrated{parse_number(parts[1], "noise variance")};
  } else if (parts.size() == 3 && parts[0] == "uncalibrated") {
    model = Uncalibrated{parse_number(parts[1], "noise lower bound"),
                         parse_number(parts[2], "noise upper bound")};
  } else {
    throw std::invalid_argument(
        "noise must be 'calibrated:<var>' or 'uncalibrated:<lo>:<hi>', got '" + std::string(text) +
        "'");
  }
  validate(model);
  return model;
}

std::vector<double> channel_covariance(const ChannelModel& channel, int antennas) {
  validate(channel);
  const auto m = static_cast<std::size_t>(antennas);
  std::vector<double> cov(m * m, 0.0);
  const double rho =
      std::holds_alternative<ExponentialCorrelated>(channel)
          ? std::get<ExponentialCorrelated>(channel).rho
          : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto lag = static_cast<double>(i > j ? i - j : j - i);
      cov[i * m + j] = (i == j) ? 1.0 : std::pow(rho, lag);
    }
  }
  return cov;
}

std::vector<double> ExperimentConfig::default_pfa_grid() {
  constexpr int kPoints = 20;
  const double lo = std::log(1e-3);
  const double hi = std::log(0.5);
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
  grid.back() = 0.5;
  return grid;
}

void ExperimentConfig::validate() const {
  if (antennas < 1 || samples < 1) throw std::invalid_argument("M and L must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (std::isnan(snr_db) || snr_db == INFINITY) {
    throw std::invalid_argument("snr_db must be finite or -inf");
  }
  sim::validate(channel);
  sim::validate(noise);
  if (detectors.empty()) throw std::invalid_argument("at least one detector is required");
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    if (!(pfa_grid[i] > 0.0 && pfa_grid[i] < 1.0)) {
      throw std::invalid_argument("pfa grid entries must lie in (0, 1)");
    }
    if (i > 0 && !(pfa_grid[i] > pfa_grid[i - 1])) {
      throw std::invalid_argument("pfa grid must be strictly increasing");
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::string out = "M=" + std::to_string(antennas) + ";L=" + std::to_string(samples) +
                    ";snr_db=" + format_double(snr_db, -1) + ";channel=" + describe(channel) +
                    ";noise=" + describe(noise) + ";trials=" + std::to_string(trials) +
                    ";seed=" + std::to_string(seed) + ";detectors=";
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    if (i) out += ',';
    out += to_string(detectors[i]);
  }
  out += ";pfa=";
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    if (i) out += ',';
    out += format_double(pfa_grid[i], -1);
  }
  out += ";form=";
  out += form == StatisticForm::Lss ? "lss" : "cross-term";
  return out;
}

std::string ExperimentConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ObservationMatrix sample_h0(int antennas, int samples, const NoiseModel& noise,
                            RandomStream& noise_stream, RandomStream& profile_stream) {
  validate(noise);
  const auto profile = draw_noise_profile(noise, antennas, profile_stream);
  return ObservationMatrix(antennas, samples, draw_noise(antennas, samples, profile, noise_stream));
}

ObservationMatrix sample_h1(int antennas, int samples, double snr_db, const ChannelModel& channel,
                            const NoiseModel& noise, H1Streams streams) {
  validate(channel);
  validate(noise);
  const auto profile = draw_noise_profile(noise, antennas, streams.profile);
  auto y = draw_noise(antennas, samples, profile, streams.noise);

  // gamma = E_s tr(Sigma_H) / tr(Sigma_N) with tr(Sigma_H) = M.
  const double gamma = std::pow(10.0, snr_db / 10.0);
  const double energy = gamma * noise_trace(noise, profile, antennas) / antennas;
  if (energy > 0.0) {
    std::vector<std::complex<double>> h(static_cast<std::size_t>(antennas));
    if (const auto* exp = std::get_if<ExponentialCorrelated>(&channel)) {
      // AR(1) recursion reproduces Sigma_H = [rho^|i-j|] exactly.
      const double innov = std::sqrt(1.0 - exp->rho * exp->rho);
      h[0] = streams.channel.complex_normal();
      for (int m = 1; m < antennas; ++m) {
        h[m] = exp->rho * h[m - 1] + innov * streams.channel.complex_normal();
      }
    } else {
      for (auto& v : h) v = streams.channel.complex_normal();
    }
    const double amp = std::sqrt(energy);
    for (int l = 0; l < samples; ++l) {
      const auto s = amp * streams.signal.complex_normal();
      for (int m = 0; m < antennas; ++m) {
        y[static_cast<std::size_t>(m) * samples + l] += h[m] * s;
      }
    }
  }
  return ObservationMatrix(antennas, samples, std::move(y));
}

}  // namespace lss::sim
