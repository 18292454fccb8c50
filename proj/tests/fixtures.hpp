#pragma once

#include <cmath>
#include <numbers>

#include "motorlab/model.hpp"

namespace fixtures {

using namespace motorlab;

inline constexpr double kPi = std::numbers::pi;

// psi' = amplitude * cos(2 pi x), negative lobes scaled by `negative_scale`.
inline Potential cosine(double amplitude = 1.0, double negative_scale = 1.0) {
    CosineShape s;
    s.amplitude = amplitude;
    s.negative_scale = negative_scale;
    return Potential::cosine(s);
}

inline ModelConfig make_config(std::vector<Potential> pots, TransitionRates rates,
                               Normalization norm = Normalization::UnitAtOrigin) {
    ModelConfig c;
    c.name = "fixture";
    c.potentials = PotentialSet(std::move(pots));
    c.rates = std::move(rates);
    c.normalization = norm;
    return c;
}

inline ModelConfig linear_single(double slope = 1.0, Normalization norm = Normalization::UnitAtOrigin) {
    return make_config({Potential::linear(slope)}, TransitionRates::uniform(1, 0.0), norm);
}

inline ModelConfig symmetric_pair(const Potential& p, double nu = 1.0,
                                  Normalization norm = Normalization::UnitAtOrigin) {
    return make_config({p, p}, TransitionRates::uniform(2, nu), norm);
}

// Two constant-rate species: nu_21 = a (1 -> 2), nu_12 = b (2 -> 1).
inline TransitionRates pair_rates(double a, double b, Regime regime = Regime::Bounded) {
    std::vector<std::vector<std::optional<RateFunction>>> off(2, std::vector<std::optional<RateFunction>>(2));
    off[1][0] = RateFunction::constant(a);
    off[0][1] = RateFunction::constant(b);
    return TransitionRates::with_consistent_diagonal(2, off, regime, std::min(a, b));
}

inline SawtoothShape demo_sawtooth(double offset) {
    SawtoothShape s;
    s.periods = 3;
    s.amplitude = 0.5;
    s.rise_fraction = 0.8;
    s.offset = offset;
    s.mollify_width = 0.01;
    return s;
}

inline ModelConfig demo_pair(Regime regime = Regime::Bounded, Normalization norm = Normalization::UnitAtOrigin) {
    return make_config({Potential::sawtooth(demo_sawtooth(0.1)), Potential::sawtooth(demo_sawtooth(0.6))},
                       pair_rates(1.0, 1.0, regime), norm);
}

}  // namespace fixtures
