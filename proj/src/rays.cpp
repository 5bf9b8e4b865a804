#include "pnmzi/rays.hpp"

#include <cmath>
#include <sstream>

namespace pnmzi {

void NullRay::validate() const {
    if (std::abs(n_hat.norm() - 1.0) > 1e-12) throw DomainError("ray direction must be a Euclidean unit vector");
    if (!(omega_inf > 0.0)) throw DomainError("ray omega_inf must be > 0");
}

NullRay NullRay::between(const Vec3& from, const Vec3& to, double omega_inf, double t0) {
    const Vec3 d = to - from;
    if (!(d.norm() > 0.0)) throw DomainError("coincident ray endpoints");
    return NullRay{from, d.normalized(), omega_inf, t0};
}

double shapiro_log(const Vec3& from, const Vec3& to) {
    const Vec3 d = to - from;
    const double len = d.norm();
    if (len == 0.0) return 0.0;
    const Vec3 n = d / len;
    const double rb = from.norm();
    const double rx = to.norm();
    if (!(rb > 0.0) || !(rx > 0.0)) throw DomainError("segment endpoint at the origin");
    const double bn = from.dot(n);
    const double xn = to.dot(n);
    const double perp2 = from.cross(n).squaredNorm();

    if (bn >= 0.0) {
        // ln((r + x.n)/(|b| + b.n)) with A - B = L + L(2 b.n + L)/(r + |b|)
        const double diff = len + len * (2.0 * bn + len) / (rx + rb);
        return std::log1p(diff / (rb + bn));
    }
    if (xn <= 0.0) {
        // same line, so (r + x.n)(r - x.n) = (|b| + b.n)(|b| - b.n): use the conjugate form
        const double diff = len * (rx + rb - 2.0 * bn - len) / (rx + rb);
        return std::log1p(diff / (rx - xn));
    }
    if (perp2 <= 1e-28 * rb * rb) throw DomainError("segment passes through the origin");
    const double a = rx + xn;
    const double b = perp2 / (rb - bn);
    return std::log(a / b);
}

FlightTime time_of_flight(const PpnBody& body, const Vec3& from, const Vec3& to) {
    const double c = body.constants.c;
    FlightTime ft;
    ft.c = c;
    ft.euclidean_length = (to - from).norm();
    if (ft.euclidean_length == 0.0) return ft;
    ft.shapiro_length = (1.0 + body.gamma_ppn) * body.gm / (c * c) * shapiro_log(from, to);
    return ft;
}

double proper_length(const PpnBody& body, const Vec3& from, const Vec3& to) {
    const double len = (to - from).norm();
    if (len == 0.0) return 0.0;
    const double c = body.constants.c;
    return len + body.gamma_ppn * body.gm / (c * c) * shapiro_log(from, to);
}

double proper_length(const PpnBody& body, const RaySolution& ray) {
    return proper_length(body, ray.b_start, ray.chord_end(body.constants.c));
}

RaySolution integrate_ray_ppn(const PpnBody& body, const NullRay& ray, double duration,
                              const PpnRayOptions& opt) {
    body.validate();
    ray.validate();
    if (!(duration > 0.0)) throw DomainError("ray duration must be > 0");
    const double c = body.constants.c;
    const Vec3 b = ray.b_start;
    const Vec3 n = ray.n_hat;
    const double len = c * duration;

    // closest approach of the chord to the centre
    const double s_min = std::clamp(-b.dot(n), 0.0, len);
    if ((b + n * s_min).norm() <= 0.5 * body.radius)
        throw DomainError("ray passes through the body interior (r <= radius/2)");

    const double k = 1.0 + body.gamma_ppn;
    const double gm = body.gm;
    auto sys = [&](const ode::State<7>& y, ode::State<7>& dy, double t) {
        const Vec3 x0 = b + n * (c * t);
        const double r = x0.norm();
        const Vec3 grad_u = -gm * x0 / (r * r * r);
        const Vec3 acc = k * (grad_u - n * n.dot(grad_u));
        for (int i = 0; i < 3; ++i) {
            dy[i] = y[i + 3];
            dy[i + 3] = acc[i];
        }
        dy[6] = -k * gm / (r * c);
    };

    RaySolution sol;
    sol.b_start = b;
    sol.n_hat = n;
    sol.t0 = ray.t0;
    sol.duration = duration;
    ode::Options o;
    o.rel_tol = opt.rel_tol;
    o.max_step = duration / static_cast<double>(std::max<std::size_t>(opt.min_samples, 1));
    o.initial_step = o.max_step * 1e-3;
    o.min_step_rel = 1e-15;
    auto record = [&](double t, const ode::State<7>& y) {
        sol.samples.push_back({t, Vec3(y[0], y[1], y[2]), y[6]});
    };
    ode::integrate<7>(sys, ode::State<7>{}, 0.0, duration, o, ode::NoEvent{}, record);

    sol.t_arrival = ray.t0 + duration;
    sol.path_length = proper_length(body, b, b + n * len);
    sol.x_par2_closed = -k * gm / (c * c) * shapiro_log(b, b + n * len);
    return sol;
}

// ---- oracle ----

namespace {

struct Geometry4 {
    Mat4 g;
    std::array<Mat4, 3> dg;  // spatial derivatives
    MetricSample s;
};

Geometry4 evaluate(const StationaryMetric& metric, const Vec3& x) {
    Geometry4 geo;
    geo.s = metric.sample(x);
    const MetricSample& s = geo.s;
    geo.g.setZero();
    geo.g(0, 0) = -(1.0 + s.h_dev);
    for (int i = 0; i < 3; ++i) {
        geo.g(0, i + 1) = geo.g(i + 1, 0) = 0.5 * s.r_vec[i];
        geo.g(i + 1, i + 1) = 1.0 + s.w_dev;
    }
    for (int k = 0; k < 3; ++k) {
        Mat4& d = geo.dg[k];
        d.setZero();
        d(0, 0) = -s.grad_h_dev[k];
        for (int i = 0; i < 3; ++i) {
            d(0, i + 1) = d(i + 1, 0) = 0.5 * s.r_jacobian(i, k);
            d(i + 1, i + 1) = s.grad_w_dev[k];
        }
    }
    return geo;
}

// Gamma^mu_ab a^a b^b
Vec4 christoffel_contract(const Geometry4& geo, const Mat4& ginv, const Vec4& a, const Vec4& b) {
    Vec4 low = Vec4::Zero();
    for (int k = 0; k < 3; ++k) {
        const Mat4& d = geo.dg[k];
        low += 0.5 * (a[k + 1] * (d * b) + b[k + 1] * (d * a));
        low[k + 1] -= 0.5 * a.dot(d * b);
    }
    return ginv * low;
}

constexpr std::size_t kN = 12;

struct Layout {
    // y[0] = ct - sigma, y[1..3] = x - b - n sigma, y[4] = p0 - 1, y[5..7] = p - n, y[8..11] = f - f_init
    static Vec3 xi(const ode::State<kN>& y) { return {y[1], y[2], y[3]}; }
    static Vec3 pi(const ode::State<kN>& y) { return {y[5], y[6], y[7]}; }
};

double plane_value(const PlaneTermination& p, const Vec3& b, const Vec3& n, double sigma, const Vec3& xi) {
    const Vec3 m = p.normal.normalized();
    return m.dot(b - p.point) + m.dot(n) * sigma + m.dot(xi);
}

OracleResult run_oracle(const StationaryMetric& metric, const NullRay& ray, const Termination& term,
                        const OracleOptions& opt, const Vec3* f_spatial, const Vec3& f_dev = Vec3::Zero()) {
    ray.validate();
    const Vec3 b = ray.b_start;
    const Vec3 n = ray.n_hat;
    const bool transport = f_spatial != nullptr;

    // exact null initial momentum with spatial part n
    const Geometry4 g0 = evaluate(metric, b);
    const double a = -g0.s.h_dev;
    const double w = g0.s.w_dev;
    const double beta = 0.5 * g0.s.r_vec.dot(n);
    const double dd = w - a - a * w;
    const double xx = (beta * beta + dd) / (std::sqrt(1.0 + beta * beta + dd) + 1.0);
    const double pi0 = (beta + xx + a) / (1.0 - a);

    Vec4 f_init = Vec4::Zero();
    double ff0 = 1.0;
    if (transport) {
        const Vec3 f = *f_spatial + f_dev;
        if (!(f.norm() > 0.0)) throw DomainError("zero polarization vector");
        if (std::abs(f.dot(n)) > 1e-9 * f.norm()) throw DomainError("initial polarization not transverse to the ray");
        const double p0 = 1.0 + pi0;
        const double num = 0.5 * g0.s.r_vec.dot(f) * p0 + (1.0 + w) * f.dot(n);
        const double den = -(1.0 + g0.s.h_dev) * p0 + beta;
        f_init << -num / den, *f_spatial;
        const Vec4 full(f_init[0], f.x(), f.y(), f.z());
        ff0 = full.dot(g0.g * full);
    }

    ode::State<kN> y{};
    y[4] = pi0;
    for (int i = 0; i < 3; ++i) y[9 + i] = f_dev[i];

    auto point = [&](double sigma, const ode::State<kN>& s) { return Vec3(b + n * sigma + Layout::xi(s)); };
    auto momentum = [&](const ode::State<kN>& s) {
        Vec4 p;
        p << 1.0 + s[4], n + Layout::pi(s);
        return p;
    };
    auto polarization = [&](const ode::State<kN>& s) {
        return Vec4(f_init + Vec4(s[8], s[9], s[10], s[11]));
    };

    auto sys = [&](const ode::State<kN>& s, ode::State<kN>& ds, double sigma) {
        const Geometry4 geo = evaluate(metric, point(sigma, s));
        const Mat4 ginv = geo.g.inverse();
        const Vec4 p = momentum(s);
        const Vec4 acc = -christoffel_contract(geo, ginv, p, p);
        ds[0] = s[4];
        for (int i = 0; i < 3; ++i) ds[1 + i] = s[5 + i];
        for (int i = 0; i < 4; ++i) ds[4 + i] = acc[i];
        if (transport) {
            const Vec4 df = -christoffel_contract(geo, ginv, p, polarization(s));
            for (int i = 0; i < 4; ++i) ds[8 + i] = df[i];
        } else {
            for (int i = 0; i < 4; ++i) ds[8 + i] = 0.0;
        }
    };

    auto killing_minus_one = [&](const Geometry4& geo, const ode::State<kN>& s) {
        const Vec4 p = momentum(s);
        return s[4] + geo.s.h_dev * p[0] - 0.5 * geo.s.r_vec.dot(p.tail<3>());
    };
    const double e0m1 = killing_minus_one(g0, y);
    const double e0 = 1.0 + e0m1;

    OracleResult res;
    auto check = [&](double sigma, const ode::State<kN>& s) {
        const Geometry4 geo = evaluate(metric, point(sigma, s));
        const Vec4 p = momentum(s);
        const Vec3 pi = Layout::pi(s);
        const double p0 = p[0];
        const double p2 = 1.0 + 2.0 * n.dot(pi) + pi.squaredNorm();
        const double null = -geo.s.h_dev * p0 * p0 - (2.0 * s[4] + s[4] * s[4])
                            + geo.s.r_vec.dot(p.tail<3>()) * p0 + geo.s.w_dev * p2
                            + (2.0 * n.dot(pi) + pi.squaredNorm());
        res.max_null_violation = std::max(res.max_null_violation, std::abs(null) / (p0 * p0));
        const double drift = std::abs(killing_minus_one(geo, s) - e0m1) / e0;
        res.max_killing_drift = std::max(res.max_killing_drift, drift);
        if (transport) {
            const Vec4 f = polarization(s);
            const double ff = f.dot(geo.g * f);
            const double fk = f.dot(geo.g * p);
            res.max_transversality = std::max(res.max_transversality, std::abs(fk) / (p0 * std::sqrt(std::abs(ff))));
            res.max_norm_drift = std::max(res.max_norm_drift, std::abs(ff - ff0) / std::abs(ff0));
        }
        auto bad = [&](const char* what, double v) {
            if (v > opt.constraint_tol) {
                std::ostringstream os;
                os << "oracle-invalid: " << what << " " << v << " exceeds " << opt.constraint_tol
                   << " at sigma=" << sigma << " m (" << metric.name() << ")";
                throw OracleInvalid(os.str());
            }
        };
        bad("null constraint", res.max_null_violation);
        bad("Killing drift", res.max_killing_drift);
        if (transport) {
            bad("transversality", res.max_transversality);
            bad("norm drift", res.max_norm_drift);
        }
    };

    auto delay_of = [&](double sigma, const ode::State<kN>& s) {
        const Vec3 xi = Layout::xi(s);
        const double dist = (n * sigma + xi).norm();
        return s[0] - (2.0 * sigma * n.dot(xi) + xi.squaredNorm()) / (sigma + dist);
    };

    const double c = opt.c;
    auto observe = [&](double sigma, const ode::State<kN>& s) {
        check(sigma, s);
        if (opt.record_samples) {
            res.samples.push_back({ray.t0 + (sigma + s[0]) / c, point(sigma, s), sigma > 0.0 ? delay_of(sigma, s) : 0.0});
        }
    };

    const double radius_start = b.norm();
    auto event = [&](double sigma, const ode::State<kN>& s) {
        if (const auto* p = std::get_if<PlaneTermination>(&term)) return plane_value(*p, b, n, sigma, Layout::xi(s));
        const double rt = std::get<RadiusTermination>(term).radius;
        const double r = point(sigma, s).norm();
        return rt > radius_start ? r - rt : rt - r;
    };
    if (event(0.0, y) >= 0.0) throw DomainError("ray starts on or beyond its termination surface");

    ode::Options o;
    o.rel_tol = opt.rel_tol;
    o.initial_step = 1.0;
    o.event_tol = opt.event_tol;
    o.max_steps = opt.max_steps;
    o.min_step_rel = 1e-15;
    const auto out = ode::integrate<kN>(sys, y, 0.0, opt.max_length, o, event, observe);
    if (!out.event_hit) throw IntegrationFailure("termination surface not reached", out.t,
                                                 std::vector<double>(out.y.begin(), out.y.end()));

    const double sigma = out.t;
    res.sigma = sigma;
    res.steps = out.steps;
    res.x_end = point(sigma, out.y);
    res.p_end = momentum(out.y);
    res.delay_length = delay_of(sigma, out.y);
    res.euclidean_length = (n * sigma + Layout::xi(out.y)).norm();
    res.t_arrival = ray.t0 + (sigma + out.y[0]) / c;
    if (transport) {
        const Geometry4 geo = evaluate(metric, res.x_end);
        const Vec4 f = polarization(out.y);
        const double fu = geo.g.row(0).dot(f);
        const double ku = geo.g.row(0).dot(res.p_end);
        const Vec4 fg = f - (fu / ku) * res.p_end;
        res.f_end = f;
        res.f_spatial = fg.tail<3>();
        res.f_dev_spatial = Vec3(out.y[9], out.y[10], out.y[11]) - (fu / ku) * res.p_end.tail<3>();
        res.f_norm_initial = ff0;
    }
    return res;
}

}  // namespace

OracleResult oracle_null_geodesic(const StationaryMetric& metric, const NullRay& ray,
                                  const Termination& termination, const OracleOptions& opt) {
    return run_oracle(metric, ray, termination, opt, nullptr);
}

OracleResult oracle_transport(const StationaryMetric& metric, const NullRay& ray,
                              const Termination& termination, const Vec3& f_spatial,
                              const OracleOptions& opt, const Vec3& f_dev) {
    return run_oracle(metric, ray, termination, opt, &f_spatial, f_dev);
}

}  // namespace pnmzi
