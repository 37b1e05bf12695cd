#include "resv/embedding.hpp"

#include "resv/errors.hpp"
#include "resv/io.hpp"
#include "resv/linalg.hpp"
#include "resv/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace resv {

void RandomReservoirSpec::validate() const {
    if (n < 1) throw std::invalid_argument("reservoir dimension must be at least 1");
    if (!(scale > 0.0)) throw std::invalid_argument("eigenvalue scale must be positive");
}

Mat haar_orthogonal(int n, Rng& rng) {
    Mat g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

LinearReservoir generate_reservoir(const RandomReservoirSpec& spec, Rng& rng) {
    spec.validate();
    const Mat q = haar_orthogonal(spec.n, rng);
    Vec u(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        double v = rng.uniform();
        while (v < 1e-6) v = rng.uniform();
        u[i] = v;
    }
    Mat c(spec.n, 1);
    for (Eigen::Index i = 0; i < spec.n; ++i) c(i, 0) = rng.uniform() - 0.5;
    Mat a = spec.scale * (q * u.asDiagonal() * q.transpose());
    a = 0.5 * (a + a.transpose()).eval();
    return LinearReservoir(std::move(a), std::move(c));
}

LinearReservoir generate_reservoir(const RandomReservoirSpec& spec) {
    Rng rng(spec.seed);
    return generate_reservoir(spec, rng);
}

bool eigenvalues_distinct(const CVec& eigs, double tol) {
    double scale = 0.0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) scale = std::max(scale, std::abs(eigs[i]));
    const double threshold = tol * (1.0 + scale);
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        for (Eigen::Index j = i + 1; j < eigs.size(); ++j)
            if (std::abs(eigs[i] - eigs[j]) <= threshold) return false;
    return true;
}

DistinctEigenvalues check_distinct_eigs(const Mat& j, double tol) {
    if (j.rows() != j.cols()) throw std::invalid_argument("matrix must be square");
    DistinctEigenvalues out;
    out.eigenvalues = sorted_eigenvalues(j);
    out.distinct = eigenvalues_distinct(out.eigenvalues, tol);
    return out;
}

EmbeddingReport check_independence(const LinearReservoir& res, const CVec& eigs, double tol,
                                   double distinct_tol) {
    if (res.input_dim() != 1)
        throw std::invalid_argument("independence check requires a scalar observation (C is N x 1)");
    const Eigen::Index n = res.state_dim();
    const Eigen::Index q = eigs.size();
    const Vec& spectrum = res.spectral().eigenvalues();

    EmbeddingReport rep;
    rep.eigenvalues = eigs;
    rep.distinct = eigenvalues_distinct(eigs, distinct_tol);
    rep.columns.resize(n, q);

    const CMat a = res.A().cast<Complex>();
    const CVec c = res.C().col(0).cast<Complex>();
    for (Eigen::Index j = 0; j < q; ++j) {
        for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
            if (std::abs(eigs[j] + spectrum[i]) < 1e-12)
                throw SpectralCollisionError("A + lambda I is singular for lambda = " +
                                             io::format_double(eigs[j].real()) + " + " +
                                             io::format_double(eigs[j].imag()) + "i");
        }
        CMat shifted = a;
        shifted.diagonal().array() += eigs[j];
        rep.columns.col(j) = shifted.partialPivLu().solve(c);
    }

    if (q > 0) {
        Eigen::JacobiSVD<CMat> svd(rep.columns);
        rep.singular_values = svd.singularValues();
        const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
        rep.rank = 0;
        for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
            if (rep.singular_values[i] > tol * smax && smax > 0.0) ++rep.rank;
        // q > N leaves q - N columns without a singular value
        rep.smallest_singular_value = q > n ? 0.0 : rep.singular_values[rep.singular_values.size() - 1];
    }
    rep.verdict = rep.distinct && rep.rank == q;
    return rep;
}

EmbeddingSweep monte_carlo_embedding_rate(const RandomReservoirSpec& spec, const Mat& j,
                                          int trials, unsigned threads, double rank_tol) {
    if (trials < 1) throw std::invalid_argument("at least one trial is required");
    spec.validate();
    const CVec eigs = check_distinct_eigs(j).eigenvalues;

    EmbeddingSweep sweep;
    sweep.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(
        sweep.trials.size(),
        [&](std::size_t i) {
            RandomReservoirSpec s = spec;
            s.seed = spec.seed + i;
            const LinearReservoir res = generate_reservoir(s);
            EmbeddingReport rep = check_independence(res, eigs, rank_tol);
            rep.seed = s.seed;
            sweep.trials[i] = std::move(rep);
        },
        threads);

    int successes = 0;
    double min_sv = std::numeric_limits<double>::infinity();
    for (const auto& t : sweep.trials) {
        successes += t.verdict ? 1 : 0;
        min_sv = std::min(min_sv, t.smallest_singular_value);
    }
    sweep.success_fraction = static_cast<double>(successes) / trials;
    sweep.min_smallest_singular_value = min_sv;
    return sweep;
}

std::string embedding_report_json(const EmbeddingReport& report) {
    nlohmann::ordered_json j;
    j["seed"] = report.seed;
    auto eigs = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
        eigs.push_back({report.eigenvalues[i].real(), report.eigenvalues[i].imag()});
    j["eigenvalues"] = eigs;
    j["singular_values"] = std::vector<double>(report.singular_values.data(),
                                               report.singular_values.data() + report.singular_values.size());
    j["rank"] = report.rank;
    j["distinct"] = report.distinct;
    j["verdict"] = report.verdict;
    return j.dump(2);
}

void write_sweep_csv(std::ostream& out, const EmbeddingSweep& sweep) {
    out << "seed,rank,sigma_min_col,verdict\n";
    for (const auto& t : sweep.trials)
        out << t.seed << ',' << t.rank << ',' << io::format_double(t.smallest_singular_value) << ','
            << (t.verdict ? 1 : 0) << '\n';
}

} // namespace resv
