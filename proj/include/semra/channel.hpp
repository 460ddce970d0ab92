// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace semra {

enum class Fading { awgn, rayleigh };

Fading parse_fading(const std::string& name);
std::string to_string(Fading f);

/// Link parameters for one user. Users share the downlink by TDM, so the SNR
/// has no interference term.
struct ChannelParams {
    double noise_power = 5e-6;    // W, after bandwidth
    double pathloss_gain = 1e-7;  // dimensionless, path loss and shadowing combined
    Fading fading = Fading::rayleigh;

    void check() const;
};

/// Triplet codeword length and decoder correction capability, in bits.
struct CodingParams {
    int triplet_bits = 512;    // L_T
    int correctable_bits = 26; // L_E

    void check() const;
};

struct LinkSNR {
    double value = 0.0;  // linear
};

LinkSNR snr(double power, const ChannelParams& params);

/// BPSK bit error probability. AWGN: Q(sqrt(2 snr)); Rayleigh (average over
/// the fading distribution): (1 - sqrt(snr / (1 + snr))) / 2.
double bit_error_prob(LinkSNR snr, Fading fading);

/// Probability that more than L_E of the L_T codeword bits are flipped,
/// i.e. the upper binomial tail P[Binomial(L_T, ber) > L_E].
double triplet_drop_prob(double ber, const CodingParams& coding);

/// Monte Carlo estimate of triplet_drop_prob.
double mc_drop_prob(double ber, const CodingParams& coding, std::uint64_t trials, std::uint64_t seed);

/// Composition snr -> ber -> drop probability for one triplet.
double drop_prob_at_power(double power, const ChannelParams& chan, const CodingParams& coding);

}  // namespace semra
