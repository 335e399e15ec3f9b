#include "fpbandits/links.hpp"

#include <cmath>
#include <limits>

#include "fpbandits/errors.hpp"

namespace fpbandits {

LinkSpec LinkSpec::linear(double sigma) {
    return LinkSpec{LinkKind::Linear, 1.0, 0.0, 0.0, sigma};
}

LinkSpec LinkSpec::logistic(double derivative_floor) {
    return LinkSpec{LinkKind::Logistic, 0.25, 1.0, derivative_floor, 1.0};
}

LinkSpec LinkSpec::poisson() {
    return LinkSpec{LinkKind::Poisson, std::exp(1.0), 1.0, 0.0, 1.0};
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double checked_exp(double z) {
    const double v = std::exp(z);
    if (!std::isfinite(v)) {
        throw OverflowError("poisson link: e^z exceeds the floating-point range");
    }
    return v;
}

}  // namespace

double mu(const LinkSpec& link, double z) {
    switch (link.kind) {
        case LinkKind::Linear:
            return z;
        case LinkKind::Logistic:
            return sigmoid(z);
        case LinkKind::Poisson:
            return checked_exp(z);
    }
    return z;
}

double mu_dot(const LinkSpec& link, double z) {
    double d = 1.0;
    switch (link.kind) {
        case LinkKind::Linear:
            d = 1.0;
            break;
        case LinkKind::Logistic: {
            const double s = sigmoid(z);
            d = s * (1.0 - s);
            break;
        }
        case LinkKind::Poisson:
            d = checked_exp(z);
            break;
    }
    return link.derivative_floor > 0.0 ? std::max(d, link.derivative_floor) : d;
}

double mu_antideriv(const LinkSpec& link, double z) {
    switch (link.kind) {
        case LinkKind::Linear:
            return 0.5 * z * z;
        case LinkKind::Logistic:
            // log(1 + e^z) without overflow.
            return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        case LinkKind::Poisson:
            return checked_exp(z);
    }
    return 0.5 * z * z;
}

double sample_reward(const LinkSpec& link, double z, RngStream& rng) {
    switch (link.kind) {
        case LinkKind::Linear:
            return z + link.noise_sigma * rng.next_normal();
        case LinkKind::Logistic:
            return rng.next_double() < sigmoid(z) ? 1.0 : 0.0;
        case LinkKind::Poisson:
            return static_cast<double>(rng.next_poisson(checked_exp(z)));
    }
    return z;
}

}  // namespace fpbandits
