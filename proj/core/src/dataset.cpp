#include "stratrand/dataset.hpp"

#include <string>

#include "stratrand/errors.hpp"

namespace stratrand {

namespace {

void add_to_cell(CellSummary& c, const Eigen::VectorXd& x, double y, int p) {
    if (c.n == 0) {
        c.mean_x = Eigen::VectorXd::Zero(p);
        c.gram = Eigen::MatrixXd::Zero(p, p);
        c.xy = Eigen::VectorXd::Zero(p);
    }
    c.n += 1;
    const double dy = y - c.mean_y;
    const Eigen::VectorXd dx = x - c.mean_x;
    c.mean_y += dy / static_cast<double>(c.n);
    c.mean_x += dx / static_cast<double>(c.n);
    const double dy2 = y - c.mean_y;
    c.ss_y += dy * dy2;
    const double shrink = static_cast<double>(c.n - 1) / static_cast<double>(c.n);
    if (p > 0) {
        c.gram.noalias() += (dx * dx.transpose()) * shrink;
        c.xy.noalias() += dx * dy2;
    }
}

void add_to_pooled(ZSummary& z, const Eigen::VectorXd& x, int p) {
    z.n += 1;
    const Eigen::VectorXd dx = x - z.mean_x;
    z.mean_x += dx / static_cast<double>(z.n);
    if (p > 0) {
        const double shrink = static_cast<double>(z.n - 1) / static_cast<double>(z.n);
        z.cxx.noalias() += (dx * dx.transpose()) * shrink;
    }
}

} // namespace

DatasetSummary summarize(const TrialDataset& dataset) {
    DatasetSummary out;
    out.k = dataset.k;
    out.p = dataset.p;
    if (dataset.k < 2) throw ConfigMismatch("dataset declares k=" + std::to_string(dataset.k));
    if (dataset.p < 0) throw ConfigMismatch("dataset declares p=" + std::to_string(dataset.p));

    int factors = -1;
    for (const auto& s : dataset.subjects) {
        if (s.arm < 1 || s.arm > dataset.k)
            throw IncompleteRecord("subject " + std::to_string(s.id) + ": arm " +
                                   std::to_string(s.arm) + " outside 1.." + std::to_string(dataset.k));
        if (!s.y.has_value())
            throw IncompleteRecord("subject " + std::to_string(s.id) + ": missing outcome");
        if (static_cast<int>(s.x.size()) != dataset.p)
            throw IncompleteRecord("subject " + std::to_string(s.id) + ": covariate length " +
                                   std::to_string(s.x.size()) + " != p=" + std::to_string(dataset.p));
        if (factors < 0) factors = s.stratum.factors();
        else if (s.stratum.factors() != factors)
            throw ConfigMismatch("subject " + std::to_string(s.id) + ": stratum " + s.stratum.str() +
                                 " has " + std::to_string(s.stratum.factors()) +
                                 " factors, expected " + std::to_string(factors));

        auto& z = out.strata[s.stratum];
        if (z.arm.empty()) {
            z.arm.resize(dataset.k);
            z.mean_x = Eigen::VectorXd::Zero(dataset.p);
            z.cxx = Eigen::MatrixXd::Zero(dataset.p, dataset.p);
        }
        add_to_pooled(z, s.x, dataset.p);
        add_to_cell(z.arm[s.arm - 1], s.x, *s.y, dataset.p);
        out.n += 1;
    }
    return out;
}

} // namespace stratrand
