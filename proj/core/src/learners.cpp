#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"

namespace eventchron::discovery {

NumericData NumericData::from(const data::EventMatrix& m) {
    if (!m.is_complete()) throw ValidationError("numeric conversion needs a complete matrix");
    NumericData out{m.columns(), Eigen::MatrixXd(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()))};
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m.at(r, c) == data::Cell::One ? 1.0 : 0.0;
        }
    }
    return out;
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "hc") return Algorithm::Hc;
    if (name == "pc") return Algorithm::Pc;
    if (name == "lingam") return Algorithm::Lingam;
    if (name == "notears") return Algorithm::Notears;
    if (name == "notears-stability") return Algorithm::NotearsStability;
    throw ValidationError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Hc: return "hc";
        case Algorithm::Pc: return "pc";
        case Algorithm::Lingam: return "lingam";
        case Algorithm::Notears: return "notears";
        case Algorithm::NotearsStability: return "notears-stability";
    }
    return "unknown";
}

Learner make_learner(Algorithm algorithm, LearnerParams params) {
    switch (algorithm) {
        case Algorithm::Hc:
            return [p = params.hc](const data::EventMatrix& m, std::uint64_t seed) { return hc_learn(m, p, seed); };
        case Algorithm::Pc:
            return [p = params.pc](const data::EventMatrix& m, std::uint64_t) { return pc_learn_detailed(m, p).dag; };
        case Algorithm::Lingam:
            return [p = params.lingam](const data::EventMatrix& m, std::uint64_t) { return lingam_learn(m, p); };
        case Algorithm::Notears:
            return [p = params.notears](const data::EventMatrix& m, std::uint64_t) { return notears_learn(m, p).dag; };
        case Algorithm::NotearsStability:
            return [p = params.stability](const data::EventMatrix& m, std::uint64_t seed) {
                auto opts = p;
                opts.seed = seed;
                return stability_select(m, opts).dag;
            };
    }
    throw ValidationError("unknown algorithm");
}

}  // namespace eventchron::discovery
