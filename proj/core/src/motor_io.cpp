#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "csv.hpp"
#include "gearopt/error.hpp"
#include "gearopt/motor.hpp"

namespace gearopt {

using json = nlohmann::ordered_json;

MotorMap load_map(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    int col_w = -1, col_t = -1, col_l = -1;
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split(line);
        n_cols = fields.size();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto f = fields[i];
            if (f == "omega") col_w = static_cast<int>(i);
            else if (f == "torque") col_t = static_cast<int>(i);
            else if (f == "loss") col_l = static_cast<int>(i);
            else throw ParseError("unknown column '" + std::string(f) + "'", line_no);
        }
        break;
    }
    if (col_w < 0 || col_t < 0 || col_l < 0) {
        throw ParseError("map header must contain omega, torque and loss", line_no);
    }
    std::vector<MapSample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split(line);
        if (fields.size() != n_cols) {
            throw ParseError("expected " + std::to_string(n_cols) + " fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        samples.push_back({detail::parse_number(fields[col_w], line_no), detail::parse_number(fields[col_t], line_no),
                           detail::parse_number(fields[col_l], line_no)});
    }
    return MotorMap::from_samples(samples);
}

MotorMap load_map_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open map file '" + path + "'");
    }
    return load_map(in);
}

void write_map(std::ostream& out, const MotorMap& map)
{
    std::ostringstream os;
    os << std::setprecision(17) << "omega,torque,loss\n";
    for (const auto& s : map.samples()) {
        os << s.omega << ',' << s.torque << ',' << s.loss << '\n';
    }
    out << os.str();
}

std::string model_to_json(const LossModel& model)
{
    json j;
    j["form"] = to_string(model.form());
    j["limits"] = {{"omega_max", model.limits().omega_max},
                   {"T_max", model.limits().T_max},
                   {"P_max", model.limits().P_max}};
    j["power"] = model.power_grid();
    json c0 = json::array(), c1 = json::array(), c2 = json::array();
    for (const auto& c : model.grid_coefficients()) {
        c0.push_back(c.c0);
        c1.push_back(c.c1);
        c2.push_back(c.c2);
    }
    j["c0"] = std::move(c0);
    j["c1"] = std::move(c1);
    j["c2"] = std::move(c2);
    return j.dump(2);
}

LossModel model_from_json(std::istream& in)
{
    json j;
    try {
        j = json::parse(in);
        const auto form_name = j.at("form").get<std::string>();
        LossForm form;
        if (form_name == "fractional") form = LossForm::fractional;
        else if (form_name == "quadratic") form = LossForm::quadratic;
        else throw ParseError("unknown loss form '" + form_name + "'");
        const auto& lim = j.at("limits");
        MotorLimits limits{lim.at("omega_max").get<double>(), lim.at("T_max").get<double>(),
                           lim.at("P_max").get<double>()};
        auto power = j.at("power").get<std::vector<double>>();
        const auto c0 = j.at("c0").get<std::vector<double>>();
        const auto c1 = j.at("c1").get<std::vector<double>>();
        const auto c2 = j.at("c2").get<std::vector<double>>();
        if (c0.size() != power.size() || c1.size() != power.size() || c2.size() != power.size()) {
            throw ParseError("model coefficient arrays differ in length from the power grid");
        }
        std::vector<LossCoefficients> coeffs(power.size());
        for (std::size_t k = 0; k < power.size(); ++k) {
            coeffs[k] = {c0[k], c1[k], c2[k]};
        }
        return LossModel(form, std::move(power), std::move(coeffs), limits);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model JSON: ") + e.what());
    }
}

LossModel load_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open model file '" + path + "'");
    }
    return model_from_json(in);
}

} // namespace gearopt
