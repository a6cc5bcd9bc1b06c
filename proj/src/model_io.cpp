#include "sbmrobust/model_io.hpp"

#include <cmath>
#include <fstream>

namespace sbmrobust {

namespace {

double number_at(const nlohmann::json& value, const std::string& field)
{
    if (!value.is_number()) throw InvalidModel(field + ": expected a number");
    return value.get<double>();
}

}  // namespace

BlockModel model_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw InvalidModel("model: expected an object with fields B, n, e");
    for (const char* key : {"B", "n", "e"})
        if (!doc.contains(key)) throw InvalidModel(std::string(key) + ": missing field");
    for (const auto& item : doc.items())
        if (item.key() != "B" && item.key() != "n" && item.key() != "e")
            throw InvalidModel(item.key() + ": unknown field");

    const auto& jb = doc.at("B");
    if (!jb.is_number_integer() || jb.get<long long>() < 1)
        throw InvalidModel("B: expected an integer >= 1");
    const auto B = static_cast<Eigen::Index>(jb.get<long long>());

    const auto& jn = doc.at("n");
    if (!jn.is_array() || static_cast<Eigen::Index>(jn.size()) != B)
        throw InvalidModel("n: expected an array of B = " + std::to_string(B) + " numbers");
    Eigen::VectorXd n(B);
    for (Eigen::Index r = 0; r < B; ++r) n(r) = number_at(jn[r], "n[" + std::to_string(r) + "]");

    const auto& je = doc.at("e");
    if (!je.is_array() || static_cast<Eigen::Index>(je.size()) != B)
        throw InvalidModel("e: expected a " + std::to_string(B) + " x " + std::to_string(B) + " array");
    Eigen::MatrixXd e(B, B);
    for (Eigen::Index r = 0; r < B; ++r) {
        const auto& row = je[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != B)
            throw InvalidModel("e[" + std::to_string(r) + "]: expected " + std::to_string(B) + " numbers");
        for (Eigen::Index s = 0; s < B; ++s)
            e(r, s) = number_at(row[s], "e[" + std::to_string(r) + "][" + std::to_string(s) + "]");
    }
    for (Eigen::Index r = 0; r < B; ++r) {
        for (Eigen::Index s = r + 1; s < B; ++s) {
            const double scale = std::max(std::abs(e(r, s)), std::abs(e(s, r)));
            if (std::abs(e(r, s) - e(s, r)) > 1e-9 * scale)
                throw InvalidModel("e: asymmetric entries e[" + std::to_string(r) + "][" +
                                   std::to_string(s) + "] and e[" + std::to_string(s) + "][" +
                                   std::to_string(r) + "]");
            const double mean = 0.5 * (e(r, s) + e(s, r));
            e(r, s) = e(s, r) = mean;
        }
    }
    return BlockModel(std::move(n), std::move(e));
}

nlohmann::json model_to_json(const BlockModel& model)
{
    const int B = model.blocks();
    nlohmann::json n = nlohmann::json::array();
    nlohmann::json e = nlohmann::json::array();
    for (int r = 0; r < B; ++r) {
        n.push_back(model.size(r));
        nlohmann::json row = nlohmann::json::array();
        for (int s = 0; s < B; ++s) row.push_back(model.edge(r, s));
        e.push_back(std::move(row));
    }
    return {{"B", B}, {"n", std::move(n)}, {"e", std::move(e)}};
}

BlockModel read_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidModel("model: cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& err) {
        throw InvalidModel("model: " + path.string() + " is not a valid document: " + err.what());
    }
    return model_from_json(doc);
}

void write_model(const std::filesystem::path& path, const BlockModel& model)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << model_to_json(model).dump(2) << '\n';
}

}  // namespace sbmrobust
