// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace semra {

Fading parse_fading(const std::string& name) {
    if (name == "awgn") return Fading::awgn;
    if (name == "rayleigh") return Fading::rayleigh;
    throw std::invalid_argument("unknown fading model: " + name);
}

std::string to_string(Fading f) {
    return f == Fading::awgn ? "awgn" : "rayleigh";
}

void ChannelParams::check() const {
    if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
        throw std::invalid_argument("channel: noise_power must be > 0");
    }
    if (!(pathloss_gain > 0.0) || !std::isfinite(pathloss_gain)) {
        throw std::invalid_argument("channel: pathloss_gain must be > 0");
    }
}

void CodingParams::check() const {
    if (triplet_bits < 1) throw std::invalid_argument("coding: L_T must be >= 1");
    if (correctable_bits < 0 || correctable_bits >= triplet_bits) {
        throw std::invalid_argument("coding: need 0 <= L_E < L_T");
    }
}

LinkSNR snr(double power, const ChannelParams& params) {
    if (!(power >= 0.0)) throw std::invalid_argument("snr: negative transmit power");
    return {power * params.pathloss_gain / params.noise_power};
}

double bit_error_prob(LinkSNR s, Fading fading) {
    if (!(s.value >= 0.0)) throw std::invalid_argument("bit_error_prob: negative snr");
    if (fading == Fading::awgn) return 0.5 * std::erfc(std::sqrt(s.value));
    if (std::isinf(s.value)) return 0.0;
    return 0.5 * (1.0 - std::sqrt(s.value / (1.0 + s.value)));
}

double triplet_drop_prob(double ber, const CodingParams& coding) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw std::invalid_argument("triplet_drop_prob: ber outside [0, 1]");
    const int n = coding.triplet_bits;
    const int limit = coding.correctable_bits;
    if (ber == 0.0) return 0.0;
    if (ber == 1.0) return limit < n ? 1.0 : 0.0;

    // Terms are kept relative to the pmf at the mode and walked outward by
    // exact ratios; the common scale cancels in upper / (upper + lower).
    const double odds = ber / (1.0 - ber);
    const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * ber)), 0, n);
    double upper = 0.0;
    double lower = 0.0;
    (mode > limit ? upper : lower) += 1.0;

    double term = 1.0;
    for (int k = mode; k < n; ++k) {
        term *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
        if (term == 0.0) break;
        (k + 1 > limit ? upper : lower) += term;
    }
    term = 1.0;
    for (int k = mode; k > 0; --k) {
        term *= static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
        if (term == 0.0) break;
        (k - 1 > limit ? upper : lower) += term;
    }
    return upper / (upper + lower);
}

double mc_drop_prob(double ber, const CodingParams& coding, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("mc_drop_prob: trials must be >= 1");
    if (!(ber >= 0.0 && ber <= 1.0)) throw std::invalid_argument("mc_drop_prob: ber outside [0, 1]");
    std::mt19937_64 rng(seed);
    std::binomial_distribution<int> bits(coding.triplet_bits, ber);
    std::uint64_t drops = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        if (bits(rng) > coding.correctable_bits) ++drops;
    }
    return static_cast<double>(drops) / static_cast<double>(trials);
}

double drop_prob_at_power(double power, const ChannelParams& chan, const CodingParams& coding) {
    return triplet_drop_prob(bit_error_prob(snr(power, chan), chan.fading), coding);
}

}  // namespace semra
