#include "sgdlab/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"
#include "sgdlab/numerics/parallel.hpp"
#include "sgdlab/sgd/sgd.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

namespace {

void require_dense(std::size_t p, const char* who) {
    if (p > kMaxDenseParams) {
        throw UnsupportedError(std::string(who) + ": P = " + std::to_string(p) + " exceeds the dense limit " +
                               std::to_string(kMaxDenseParams));
    }
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

// fill(mu, v) writes v_mu and returns its weight w_mu.
using OuterFill = std::function<double(std::size_t mu, std::span<double> v)>;

// (1/N) sum_mu w_mu v_mu v_mu^T. Samples are split into fixed index chunks
// whose partial sums are combined pairwise, so the result does not depend on
// the number of threads.
SymMatrix weighted_outer_mean(std::size_t n, std::size_t p, const OuterFill& fill) {
    const std::size_t chunk = std::max<std::size_t>(32, (n + 63) / 64);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::vector<SymMatrix> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        SymMatrix acc(p);
        Vec v(p);
        const std::size_t hi = std::min(n, (c + 1) * chunk);
        for (std::size_t mu = c * chunk; mu < hi; ++mu) {
            const double w = fill(mu, v);
            if (w != 0.0) acc.rank1_update_upper(w, v);
        }
        partial[c] = std::move(acc);
    });
    for (std::size_t stride = 1; stride < chunks; stride *= 2) {
        for (std::size_t i = 0; i + stride < chunks; i += 2 * stride) {
            double* dst = partial[i].raw();
            const auto src = partial[i + stride].data();
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
        }
    }
    SymMatrix out = std::move(partial[0]);
    out.mirror_upper();
    out *= 1.0 / static_cast<double>(n);
    return out;
}

void require_output_grad(const LossModel& model, const char* who) {
    if (!model.has_output_grad()) throw UnsupportedError(std::string(who) + ": model has no output gradient");
}

}  // namespace

double covariance_prefactor(std::size_t n, std::size_t batch) {
    if (batch < 1 || batch > n) {
        throw InputError("batch size " + std::to_string(batch) + " outside [1, " + std::to_string(n) + "]");
    }
    if (n == 1) return 0.0;
    return (1.0 / static_cast<double>(batch)) * static_cast<double>(n - batch) / static_cast<double>(n - 1);
}

CovarianceReport sigma_exact(std::span<const double> theta, const LossModel& model, std::size_t batch) {
    const std::size_t n = model.sample_count();
    const std::size_t p = model.dim();
    CovarianceReport rep;
    rep.batch = batch;
    rep.samples = n;
    rep.prefactor = covariance_prefactor(n, batch);
    require_dense(p, "sigma_exact");

    Vec mean(p);
    const auto idx = all_indices(n);
    model.batch_grad(theta, idx, mean);
    SymMatrix centered = weighted_outer_mean(n, p, [&](std::size_t mu, std::span<double> v) {
        model.sample_grad(theta, mu, v);
        for (std::size_t i = 0; i < p; ++i) v[i] -= mean[i];
        return 1.0;
    });
    centered *= rep.prefactor;
    rep.sigma_exact = std::move(centered);
    return rep;
}

SymMatrix sigma_empirical(std::span<const double> theta, const LossModel& model, std::size_t batch,
                          std::size_t n_draws, RngStream& rng) {
    const std::size_t n = model.sample_count();
    const std::size_t p = model.dim();
    if (n_draws < 2) throw InputError("sigma_empirical: n_draws must be >= 2");
    covariance_prefactor(n, batch);
    require_dense(p, "sigma_empirical");
    if (batch == n) return SymMatrix(p);

    Vec full(p), batch_g(p), xi(p), mean(p, 0.0), delta(p), scratch;
    model.batch_grad(theta, all_indices(n), full);
    std::vector<std::size_t> idx;
    SymMatrix m2(p);
    for (std::size_t k = 0; k < n_draws; ++k) {
        sample_minibatch(n, batch, rng, idx);
        model.batch_grad(theta, idx, batch_g, scratch);
        for (std::size_t i = 0; i < p; ++i) xi[i] = full[i] - batch_g[i];
        // Welford on vectors: M2 += (k/(k+1)) delta delta^T with delta = xi - mean.
        const double kk = static_cast<double>(k + 1);
        for (std::size_t i = 0; i < p; ++i) delta[i] = xi[i] - mean[i];
        m2.rank1_update_upper((kk - 1.0) / kk, delta);
        simd::axpy(1.0 / kk, delta, mean);
    }
    m2.mirror_upper();
    m2 *= 1.0 / static_cast<double>(n_draws - 1);
    return m2;
}

SymMatrix sigma_small_batch(std::span<const double> theta, const LossModel& model, std::size_t batch) {
    const std::size_t n = model.sample_count();
    covariance_prefactor(n, batch);
    require_dense(model.dim(), "sigma_small_batch");
    SymMatrix m = weighted_outer_mean(n, model.dim(), [&](std::size_t mu, std::span<double> v) {
        model.sample_grad(theta, mu, v);
        return 1.0;
    });
    m *= 1.0 / static_cast<double>(batch);
    return m;
}

SymMatrix sigma_loss_hessian(double loss, const SymMatrix& hessian, std::size_t batch) {
    if (batch < 1) throw InputError("sigma_loss_hessian: batch must be >= 1");
    return (2.0 * loss / static_cast<double>(batch)) * hessian;
}

SymMatrix gauss_newton_hessian(std::span<const double> theta, const LossModel& model) {
    require_output_grad(model, "gauss_newton_hessian");
    require_dense(model.dim(), "gauss_newton_hessian");
    return weighted_outer_mean(model.sample_count(), model.dim(), [&](std::size_t mu, std::span<double> v) {
        model.output_grad(theta, mu, v);
        return 1.0;
    });
}

double decile_overlap(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw InputError("decile_overlap: spectra must be nonempty and equal length");
    Vec sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t m = sa.size();
    double worst = 0.0;
    for (std::size_t g = 1; g < 10; ++g) {
        const std::size_t lo = g * m / 10;
        const std::size_t hi = (g + 1) * m / 10;
        if (hi <= lo) continue;
        const double ma = pairwise_sum(std::span<const double>(sa).subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
        const double mb = pairwise_sum(std::span<const double>(sb).subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
        const double diff = std::abs(ma - mb);
        if (diff == 0.0) continue;
        worst = std::max(worst, ma == 0.0 ? INFINITY : diff / std::abs(ma));
    }
    return worst;
}

DecouplingReport decoupling_check(std::span<const double> theta, const LossModel& model) {
    require_output_grad(model, "decoupling_check");
    const std::size_t n = model.sample_count();
    const std::size_t p = model.dim();
    DecouplingReport rep;
    rep.dual = p > n;

    Vec residual(n);
    std::vector<Vec> jac;
    if (rep.dual) {
        jac.assign(n, Vec(p));
        parallel_for(n, [&](std::size_t mu) { residual[mu] = model.output_grad(theta, mu, jac[mu]); });
    } else {
        Vec scratch(p);
        for (std::size_t mu = 0; mu < n; ++mu) residual[mu] = model.output_grad(theta, mu, scratch);
    }
    Vec sq(n);
    for (std::size_t mu = 0; mu < n; ++mu) sq[mu] = residual[mu] * residual[mu];
    // 2L = (1/N) sum r^2, computed from the same residuals as the exact side.
    const double two_loss = pairwise_sum(sq) / static_cast<double>(n);
    rep.loss = 0.5 * two_loss;

    if (rep.dual) {
        // K = J J^T / N; exact = D K D with D = diag(|r|); decoupled = 2L K.
        SymMatrix k(n);
        const double inv_n = 1.0 / static_cast<double>(n);
        parallel_for(n, [&](std::size_t i) {
            for (std::size_t j = i; j < n; ++j) k.raw()[i * n + j] = simd::dot(jac[i], jac[j]) * inv_n;
        });
        k.mirror_upper();
        SymMatrix exact(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = std::abs(residual[i]);
            for (std::size_t j = i; j < n; ++j) exact.raw()[i * n + j] = ri * std::abs(residual[j]) * k(i, j);
        }
        exact.mirror_upper();
        rep.exact_matrix = std::move(exact);
        rep.decoupled_matrix = two_loss * k;
    } else {
        rep.exact_matrix = weighted_outer_mean(n, p, [&](std::size_t mu, std::span<double> v) {
            model.output_grad(theta, mu, v);
            return sq[mu];
        });
        SymMatrix g = weighted_outer_mean(n, p, [&](std::size_t mu, std::span<double> v) {
            model.output_grad(theta, mu, v);
            return 1.0;
        });
        rep.decoupled_matrix = two_loss * g;
    }

    EigOptions opts;
    opts.vectors = false;
    rep.exact_spectrum = sym_eig(rep.exact_matrix, opts);
    rep.decoupled_spectrum = sym_eig(rep.decoupled_matrix, opts);
    rep.overlap = decile_overlap(rep.exact_spectrum.eigenvalues, rep.decoupled_spectrum.eigenvalues);
    return rep;
}

SymMatrix hessian_fd(std::span<const double> theta, const Objective& model, double step) {
    const std::size_t p = model.dim();
    if (p > 200) throw UnsupportedError("hessian_fd: P = " + std::to_string(p) + " > 200");
    if (theta.size() != p) throw DimensionError("hessian_fd: theta has wrong dimension");
    if (step == 0.0) {
        double inf = 0.0;
        for (double v : theta) inf = std::max(inf, std::abs(v));
        step = 1e-4 * (1.0 + inf);
    }
    if (!(step > 0.0)) throw InputError("hessian_fd: step must be positive");

    std::vector<Vec> cols(p);
    Vec x(theta.begin(), theta.end()), gp(p), gm(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double orig = x[j];
        x[j] = orig + step;
        model.grad(x, gp);
        x[j] = orig - step;
        model.grad(x, gm);
        x[j] = orig;
        cols[j].resize(p);
        for (std::size_t i = 0; i < p; ++i) cols[j][i] = (gp[i] - gm[i]) / (2.0 * step);
    }
    SymMatrix h(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) h.set(i, j, 0.5 * (cols[j][i] + cols[i][j]));
    }
    return h;
}

EffectiveDimension effective_dimension(std::span<const double> eigenvalues, double eps_rel, double eps_abs) {
    if (eigenvalues.empty()) throw InputError("effective_dimension: empty spectrum");
    if (eps_rel < 0.0 || eps_abs < 0.0) throw InputError("effective_dimension: thresholds must be >= 0");
    for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > eigenvalues[i - 1]) throw InputError("effective_dimension: spectrum not sorted descending");
    }
    EffectiveDimension ed;
    ed.eps_rel = eps_rel;
    ed.eps_abs = eps_abs;
    ed.threshold = std::max(eps_abs, eps_rel * eigenvalues.front());
    for (double v : eigenvalues) {
        if (v > ed.threshold) ed.kept.push_back(v);
    }
    ed.n = ed.kept.size();
    return ed;
}

void write_spectrum_csv(std::span<const double> eigenvalues, std::ostream& out) {
    out << "rank,eigenvalue\n";
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) out << (i + 1) << ',' << format_double(eigenvalues[i]) << '\n';
}

}  // namespace sgdlab
