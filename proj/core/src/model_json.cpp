#include "resv/model_json.hpp"

#include <stdexcept>
#include <string>

namespace resv {

std::vector<double> to_row_major(const Mat& m) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
    return v;
}

Mat from_row_major(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(v.size()) != rows * cols)
        throw std::invalid_argument("matrix data has " + std::to_string(v.size()) + " entries, expected " +
                                    std::to_string(rows * cols));
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
    return m;
}

nlohmann::ordered_json model_to_json(const ReservoirModel& model) {
    nlohmann::ordered_json j;
    if (const auto* lin = std::get_if<LinearReservoir>(&model)) {
        j["type"] = "linear";
        j["dims"] = {{"N", lin->state_dim()}, {"d", lin->input_dim()}};
        j["matrices"] = {{"A", to_row_major(lin->A())}, {"C", to_row_major(lin->C())}};
        j["params"] = nlohmann::ordered_json::object();
    } else if (const auto* esn = std::get_if<LeakyESN>(&model)) {
        j["type"] = "leaky_esn";
        j["dims"] = {{"N", esn->A.rows()}, {"d", esn->C.cols()}};
        j["matrices"] = {{"A", to_row_major(esn->A)}, {"C", to_row_major(esn->C)},
                         {"b", to_row_major(esn->b)}};
        j["params"] = {{"alpha", esn->alpha}};
    } else {
        const auto& sin = std::get<SinusoidReservoir>(model);
        j["type"] = "sinusoid";
        j["dims"] = {{"N", 2}, {"d", 1}};
        j["matrices"] = nlohmann::ordered_json::object();
        j["params"] = {{"lambda", sin.lambda}};
    }
    return j;
}

ReservoirModel model_from_json(const nlohmann::json& j) {
    try {
        const std::string type = j.at("type").get<std::string>();
        const auto n = j.at("dims").at("N").get<Eigen::Index>();
        const auto d = j.at("dims").at("d").get<Eigen::Index>();
        const auto& mats = j.at("matrices");
        auto matrix = [&](const char* name, Eigen::Index r, Eigen::Index c) {
            return from_row_major(mats.at(name).get<std::vector<double>>(), r, c);
        };
        if (type == "linear") return LinearReservoir(matrix("A", n, n), matrix("C", n, d));
        if (type == "leaky_esn") {
            LeakyESN esn{j.at("params").at("alpha").get<double>(), matrix("A", n, n), matrix("C", n, d),
                         matrix("b", n, 1).col(0)};
            esn.validate();
            return esn;
        }
        if (type == "sinusoid") {
            if (n != 2 || d != 1) throw std::invalid_argument("sinusoid reservoir has N = 2, d = 1");
            return SinusoidReservoir{j.at("params").at("lambda").get<double>()};
        }
        throw std::invalid_argument("unknown reservoir type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed model json: ") + e.what());
    }
}

nlohmann::ordered_json closed_loop_to_json(const ClosedLoopSystem& sys) {
    nlohmann::ordered_json j = model_to_json(sys.reservoir);
    j["type"] = "closed_loop";
    j["dims"]["D"] = sys.bank.size();
    j["matrices"]["alpha"] = to_row_major(sys.bank.alpha);
    j["matrices"]["beta"] = to_row_major(sys.bank.beta);
    j["matrices"]["w"] = to_row_major(sys.weights.w);
    j["params"] = {{"damp", sys.weights.damp}, {"training_residual", sys.weights.residual}};
    return j;
}

ClosedLoopSystem closed_loop_from_json(const nlohmann::json& j) {
    try {
        nlohmann::json lin = j;
        lin["type"] = "linear";
        auto model = model_from_json(lin);
        const auto n = j.at("dims").at("N").get<Eigen::Index>();
        const auto d = j.at("dims").at("D").get<Eigen::Index>();
        const auto& mats = j.at("matrices");
        FeatureBank bank{from_row_major(mats.at("alpha").get<std::vector<double>>(), d, n),
                         from_row_major(mats.at("beta").get<std::vector<double>>(), d, 1).col(0)};
        ReadoutWeights w{from_row_major(mats.at("w").get<std::vector<double>>(), d, 1).col(0),
                         j.at("params").at("damp").get<double>(),
                         j.at("params").at("training_residual").get<double>()};
        return ClosedLoopSystem{std::get<LinearReservoir>(std::move(model)), std::move(bank), std::move(w)};
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed closed-loop json: ") + e.what());
    }
}

} // namespace resv
