#include "stgcn/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "stgcn/rng.hpp"

namespace stgcn {

namespace {

constexpr double kTau = 6.283185307179586;

}  // namespace

SkeletonSequence synth_generate(std::size_t class_id, const SkeletonTemplate& skeleton,
                                std::size_t frames, std::uint64_t seed, double jitter_sigma) {
    if (class_id >= kSynthClassCount) {
        throw std::invalid_argument("synth_generate: unknown class " + std::to_string(class_id));
    }
    if (frames < 16) {
        throw std::invalid_argument("synth_generate: need at least 16 frames");
    }
    const std::size_t j_n = skeleton.joint_count;
    const std::size_t t_n = frames;
    Rng rng(derive_seed(seed, 0x73796eULL + class_id));

    SkeletonSequence seq;
    seq.template_name = skeleton.name;
    seq.label = class_id;
    seq.subject = static_cast<std::int64_t>(seed % 1000);
    seq.joints = Tensor({3, j_n, t_n});

    double phase = rng.uniform(0.0, kTau);
    double ox = rng.uniform(-0.1, 0.1);
    double oy = rng.uniform(-0.1, 0.1);
    double oz = rng.uniform(-0.1, 0.1);

    // Rest pose: joints spaced along +y. The distal half of the chain is the
    // moving "limb"; weights ramp toward the tip.
    const std::size_t limb_start = j_n / 2;
    for (std::size_t t = 0; t < t_n; ++t) {
        double progress = t_n > 1 ? static_cast<double>(t) / static_cast<double>(t_n - 1) : 0.0;
        double angle = kTau * 2.0 * static_cast<double>(t) / static_cast<double>(t_n) + phase;
        for (std::size_t j = 0; j < j_n; ++j) {
            double x = 0.0;
            double y = 0.25 * static_cast<double>(j);
            double z = 0.0;
            if (j >= limb_start) {
                double w = static_cast<double>(j - limb_start + 1) /
                           static_cast<double>(j_n - limb_start);
                switch (class_id) {
                    case 0:
                        x += 0.3 * w * std::sin(angle);
                        break;
                    case 1:
                        z += 0.5 * w * progress;
                        break;
                    case 2:
                        x += 0.3 * w * std::cos(angle);
                        z += 0.3 * w * std::sin(angle);
                        break;
                    default:
                        break;  // class 3: stationary
                }
            }
            seq.joints.at(0, j, t) = x + ox;
            seq.joints.at(1, j, t) = y + oy;
            seq.joints.at(2, j, t) = z + oz;
        }
    }
    if (jitter_sigma > 0.0) {
        for (std::size_t i = 0; i < seq.joints.size(); ++i) {
            seq.joints[i] += rng.normal(0.0, jitter_sigma);
        }
    }
    return seq;
}

}  // namespace stgcn
