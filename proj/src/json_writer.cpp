#include "qnls/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace qnls {

namespace {

std::string quote(const std::string& s) { return nlohmann::ordered_json(s).dump(); }

std::string number(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // keep it recognisably floating point
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void emit(const nlohmann::ordered_json& j, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + quote(k) + ": ";
                emit(v, indent, depth + 1, out);
            }
            out += "\n" + close + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(j[i], indent, depth + 1, out);
            }
            out += "\n" + close + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += number(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& doc, int indent) {
    std::string out;
    emit(doc, indent, 0, out);
    return out;
}

void write_json_file(const nlohmann::ordered_json& doc, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << dump_json(doc) << '\n';
        if (!f) throw std::runtime_error("write failed: " + path);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace qnls
