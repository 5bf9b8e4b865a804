#pragma once

// Adaptive Runge-Kutta-Fehlberg 7(8) driver with event location.
// The tableau comes from Boost.Odeint; step control, failure reporting and
// events are handled here.

#include "pnmzi/core.hpp"

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pnmzi::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;
    double initial_step = 1.0;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step_rel = 1e-13;  // underflow threshold relative to max(1, |t|)
    std::size_t max_steps = 1'000'000;
    double event_tol = 1e-9;      // on the event function value
};

template <std::size_t N>
struct Outcome {
    double t = 0.0;
    State<N> y{};
    bool event_hit = false;
    std::size_t steps = 0;
};

struct NoEvent {
    template <class Y>
    double operator()(double, const Y&) const { return -1.0; }
};

struct NoObserver {
    template <class Y>
    void operator()(double, const Y&) const {}
};

// Integrates y' = sys(y, dydt, t) from t0 towards t_end. Stops early when
// event(t, y) crosses from negative to non-negative; the crossing is located
// by bisection over a single explicit step from the last accepted state.
template <std::size_t N, class Sys, class Event = NoEvent, class Observer = NoObserver>
Outcome<N> integrate(Sys&& sys, State<N> y, double t0, double t_end, const Options& opt,
                     Event&& event = Event{}, Observer&& observe = Observer{}) {
    using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<State<N>>;
    Stepper stepper;
    auto rhs = [&sys](const State<N>& x, State<N>& dxdt, double t) { sys(x, dxdt, t); };

    Outcome<N> out;
    double t = t0;
    double dt = std::min({opt.initial_step, opt.max_step, t_end - t0});
    observe(t, y);
    if (!(t_end > t0)) {
        out.t = t;
        out.y = y;
        return out;
    }

    auto fail = [&](const char* why) {
        throw IntegrationFailure(why, t, std::vector<double>(y.begin(), y.end()));
    };

    State<N> trial{};
    State<N> err{};
    while (t < t_end) {
        if (out.steps >= opt.max_steps) fail("integration exceeded the step budget");
        const double remaining = t_end - t;
        const bool last = dt >= remaining;
        const double h = last ? remaining : dt;
        if (h < opt.min_step_rel * std::max(1.0, std::abs(t)) && !last) fail("step size underflow");

        stepper.do_step(rhs, y, t, trial, h, err);

        double norm = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (!std::isfinite(trial[i])) finite = false;
            const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(trial[i]));
            norm = std::max(norm, std::abs(err[i]) / scale);
        }
        if (!finite) norm = std::numeric_limits<double>::infinity();

        if (norm > 1.0) {
            dt = h * (std::isfinite(norm) ? std::max(0.2, 0.9 * std::pow(norm, -1.0 / 8.0)) : 0.2);
            if (dt < opt.min_step_rel * std::max(1.0, std::abs(t))) fail("step size underflow");
            continue;
        }

        const double t_new = last ? t_end : t + h;
        if (event(t_new, trial) >= 0.0) {
            double lo = 0.0;
            double hi = h;
            State<N> probe = trial;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                stepper.do_step(rhs, y, t, probe, mid, err);
                const double phi = event(t + mid, probe);
                if (std::abs(phi) <= opt.event_tol) {
                    hi = mid;
                    trial = probe;
                    break;
                }
                if (phi < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                    trial = probe;
                }
                if (hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) break;
            }
            ++out.steps;
            t += hi;
            y = trial;
            observe(t, y);
            out.event_hit = true;
            out.t = t;
            out.y = y;
            return out;
        }

        ++out.steps;
        t = t_new;
        y = trial;
        observe(t, y);
        const double grow = norm > 0.0 ? std::min(5.0, 0.9 * std::pow(norm, -1.0 / 8.0)) : 5.0;
        dt = std::min(h * std::max(1.0, grow), opt.max_step);
    }
    out.t = t;
    out.y = y;
    return out;
}

}  // namespace pnmzi::ode
