#pragma once

// Explicit Runge-Kutta pair of Dormand & Prince, order 8 with embedded 5th and
// 3rd order error estimators (DOP853), on complex matrix states over a real
// independent variable. Step-size control follows Hairer-Norsett-Wanner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "parmono/error.hpp"
#include "parmono/linalg.hpp"

namespace parmono {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 selects automatically
    std::size_t max_steps = 200000;
};

struct IntegrationResult {
    CMatrix y;
    /// Sum of accepted-step local error estimates (absolute, first-order
    /// accounting; a heuristic bound, not a rigorous one).
    double err_estimate = 0.0;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

namespace dop853 {

// Nodes
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

// Coupling coefficients
inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

// 8th-order weights
inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

// 3rd-order estimator
inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

// 5th-order estimator
inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

struct Step {
    CMatrix y;        // 8th-order solution at s + h
    CMatrix f_new;    // f(s + h, y)
    CMatrix err5;     // 5th-order error vector (times 1/h)
    CMatrix err3;     // 3rd-order error vector (times 1/h)
};

/// One DOP853 step from (s, y) with slope f0 = f(s, y).
template <class Rhs>
Step step(Rhs& f, double s, const CMatrix& y, const CMatrix& f0, double h) {
    const CMatrix k1 = f0;
    const CMatrix k2 = f(s + c2 * h, y + h * (a21 * k1));
    const CMatrix k3 = f(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const CMatrix k4 = f(s + c4 * h, y + h * (a41 * k1 + a43 * k3));
    const CMatrix k5 = f(s + c5 * h, y + h * (a51 * k1 + a53 * k3 + a54 * k4));
    const CMatrix k6 = f(s + c6 * h, y + h * (a61 * k1 + a64 * k4 + a65 * k5));
    const CMatrix k7 = f(s + c7 * h, y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
    const CMatrix k8 = f(s + c8 * h, y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
    const CMatrix k9 =
        f(s + c9 * h, y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
    const CMatrix k10 = f(s + c10 * h, y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 +
                                                a108 * k8 + a109 * k9));
    const CMatrix k11 = f(s + c11 * h, y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 +
                                                a118 * k8 + a119 * k9 + a1110 * k10));
    const CMatrix k12 = f(s + h, y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                                          a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11));

    const CMatrix incr = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
    Step out;
    out.y = y + h * incr;
    out.err3 = incr - bhh1 * k1 - bhh2 * k9 - bhh3 * k12;
    out.err5 = er1 * k1 + er6 * k6 + er7 * k7 + er8 * k8 + er9 * k9 + er10 * k10 + er11 * k11 + er12 * k12;
    out.f_new = f(s + h, out.y);
    return out;
}

/// Hairer's combined 5th/3rd order error norm, normalised so that <= 1 accepts.
inline double error_norm(const Step& st, const CMatrix& y0, double h, double rtol, double atol) {
    double e5 = 0.0;
    double e3 = 0.0;
    const Eigen::Index n = y0.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double sk = atol + rtol * std::max(std::abs(y0.data()[k]), std::abs(st.y.data()[k]));
        const double a5 = std::abs(st.err5.data()[k]) / sk;
        const double a3 = std::abs(st.err3.data()[k]) / sk;
        e5 += a5 * a5;
        e3 += a3 * a3;
    }
    double deno = e5 + 0.01 * e3;
    if (deno <= 0.0) deno = 1.0;
    return std::abs(h) * e5 / std::sqrt(static_cast<double>(n) * deno);
}

}  // namespace dop853

/// Integrates dy/ds = f(s, y) from s0 to s1 (s1 > s0). `observer(s, y, err)`
/// is called after every accepted step.
template <class Rhs, class Observer>
IntegrationResult integrate_dop853(Rhs&& f, double s0, double s1, const CMatrix& y0,
                                   const IntegratorOptions& opt, Observer&& observer) {
    IntegrationResult res;
    res.y = y0;
    const double span = s1 - s0;
    if (span <= 0.0) return res;
    if (!(opt.rtol > 0.0) || !(opt.atol > 0.0))
        throw Error(ErrorCode::InvalidInput, "rtol and atol must be positive");

    const Eigen::Index n = y0.size();
    auto weighted_rms = [&](const CMatrix& v, const CMatrix& ref) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double sk = opt.atol + opt.rtol * std::abs(ref.data()[k]);
            const double a = std::abs(v.data()[k]) / sk;
            acc += a * a;
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    double s = s0;
    CMatrix y = y0;
    CMatrix fy = f(s, y);
    if (!all_finite(fy)) throw Error(ErrorCode::NonFinite, "non-finite right-hand side at start");

    double h = opt.initial_step;
    if (h <= 0.0) {
        // Hairer's starting-step heuristic for an order-8 method.
        const double d0 = weighted_rms(y, y);
        const double d1 = weighted_rms(fy, y);
        double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 * span : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        const CMatrix y1 = y + h0 * fy;
        const CMatrix f1 = f(s + h0, y1);
        const double d2 = weighted_rms(f1 - fy, y) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 8.0);
        h = std::min({100.0 * h0, h1, span});
    }

    constexpr double safe = 0.9;
    constexpr double facc1 = 1.0 / 0.333;  // max shrink 3x
    constexpr double facc2 = 1.0 / 6.0;    // max growth 6x
    constexpr double expo1 = 1.0 / 8.0;
    bool last_rejected = false;

    while (s < s1) {
        if (res.steps + res.rejected >= opt.max_steps)
            throw Error(ErrorCode::IntegrationFailure, "maximum number of steps exceeded");
        if (h < 1e-14 * span)
            throw Error(ErrorCode::StepUnderflow, "step size " + std::to_string(h) + " below 1e-14 of path length");
        const bool last = s + h >= s1 - 1e-15 * span;
        if (last) h = s1 - s;

        dop853::Step st = dop853::step(f, s, y, fy, h);
        if (!all_finite(st.y) || !all_finite(st.f_new)) {
            // Treat as a failed step first; a persistent blow-up ends in underflow.
            if (h < 1e-10 * span) throw Error(ErrorCode::NonFinite, "non-finite state during integration");
            h *= 0.25;
            ++res.rejected;
            last_rejected = true;
            continue;
        }
        const double err = dop853::error_norm(st, y, h, opt.rtol, opt.atol);
        const double fac11 = std::pow(err, expo1);
        const double fac = std::max(facc2, std::min(facc1, fac11 / safe));
        double hnew = h / fac;

        if (err <= 1.0) {
            const double scale = opt.atol + opt.rtol * std::max(max_abs(y), max_abs(st.y));
            const double local = err * scale;
            res.err_estimate += local;
            ++res.steps;
            s = last ? s1 : s + h;
            y = std::move(st.y);
            fy = std::move(st.f_new);
            observer(s, y, local);
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;
            h = hnew;
        } else {
            hnew = h / std::min(facc1, fac11 / safe);
            ++res.rejected;
            last_rejected = true;
            h = hnew;
        }
    }
    res.y = std::move(y);
    return res;
}

template <class Rhs>
IntegrationResult integrate_dop853(Rhs&& f, double s0, double s1, const CMatrix& y0,
                                   const IntegratorOptions& opt) {
    return integrate_dop853(std::forward<Rhs>(f), s0, s1, y0, opt, [](double, const CMatrix&, double) {});
}

/// A single uncontrolled step of size h; used to evaluate the solution inside
/// an already accepted step (the step is shorter than the accepted one, so its
/// local error is below the accepted tolerance).
template <class Rhs>
CMatrix dop853_substep(Rhs&& f, double s, const CMatrix& y, double h) {
    if (h == 0.0) return y;
    const CMatrix f0 = f(s, y);
    return dop853::step(f, s, y, f0, h).y;
}

}  // namespace parmono
