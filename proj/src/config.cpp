#include "qkd/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace qkd {

namespace {

using json = nlohmann::ordered_json;

double as_number(const json& value, const std::string& path) {
    if (!value.is_number()) throw ConfigError(path + " must be a number");
    return value.get<double>();
}

bool as_bool(const json& value, const std::string& path) {
    if (!value.is_boolean()) throw ConfigError(path + " must be true or false");
    return value.get<bool>();
}

ChannelRole as_role(const json& value, const std::string& path) {
    if (value.is_string()) {
        const std::string role = value.get<std::string>();
        if (role == "clock") return ChannelRole::Clock;
        if (role == "data") return ChannelRole::Data;
    }
    throw ConfigError(path + " must be \"clock\" or \"data\"");
}

/// Applies the known keys of one JSON object and rejects everything else,
/// so a misspelled key can never silently fall back to a default.
struct FieldMap {
    std::map<std::string, std::function<void(const json&, const std::string&)>> fields;

    void apply(const json& obj, const std::string& prefix) const {
        if (!obj.is_object()) throw ConfigError(prefix + " must be an object");
        for (const auto& [key, value] : obj.items()) {
            const auto it = fields.find(key);
            if (it == fields.end()) throw ConfigError("unknown key: " + prefix + key);
            it->second(value, prefix + key);
        }
    }
};

auto number_field(double& target) {
    return [&target](const json& v, const std::string& path) {
        target = as_number(v, path);
    };
}

auto bool_field(bool& target) {
    return [&target](const json& v, const std::string& path) {
        target = as_bool(v, path);
    };
}

MuxChannel channel_from_json(const json& obj, const std::string& prefix) {
    MuxChannel ch;
    FieldMap map;
    map.fields["launch_power_dbm"] = number_field(ch.launch_power_dbm);
    map.fields["copropagating"] = bool_field(ch.copropagating);
    map.fields["role"] = [&ch](const json& v, const std::string& path) {
        ch.role = as_role(v, path);
    };
    map.apply(obj, prefix);
    return ch;
}

ProtocolParams params_from_json(const json& root) {
    ProtocolParams p = default_params();

    FieldMap intensity;
    intensity.fields["u"] = number_field(p.intensity.u);
    intensity.fields["v"] = number_field(p.intensity.v);
    intensity.fields["w"] = number_field(p.intensity.w);

    FieldMap prob;
    prob.fields["p_u"] = number_field(p.prob.p_u);
    prob.fields["p_v"] = number_field(p.prob.p_v);
    prob.fields["p_w"] = number_field(p.prob.p_w);
    prob.fields["qz_alice"] = number_field(p.prob.qz_alice);
    prob.fields["qz_bob"] = number_field(p.prob.qz_bob);

    FieldMap security;
    security.fields["eps_sec"] = number_field(p.security.eps_sec);
    security.fields["eps_cor"] = number_field(p.security.eps_cor);
    security.fields["f_ec"] = number_field(p.security.f_ec);

    FieldMap link;
    link.fields["length_km"] = number_field(p.link.length_km);
    link.fields["loss_coeff_db_per_km"] = number_field(p.link.loss_coeff_db_per_km);
    link.fields["extra_loss_db"] = number_field(p.link.extra_loss_db);
    link.fields["clock_hz"] = number_field(p.link.clock_hz);
    link.fields["session_pulses"] = number_field(p.link.session_pulses);

    FieldMap detector;
    detector.fields["efficiency"] = number_field(p.detector.efficiency);
    detector.fields["dark_cps"] = number_field(p.detector.dark_cps);
    detector.fields["e_misalign"] = number_field(p.detector.e_misalign);
    detector.fields["gate_width_s"] = number_field(p.detector.gate_width_s);
    detector.fields["temperature_c"] = number_field(p.detector.temperature_c);
    detector.fields["ref_dark_cps"] = number_field(p.detector.ref_dark_cps);
    detector.fields["ref_temperature_c"] = number_field(p.detector.ref_temperature_c);

    FieldMap mux;
    mux.fields["enabled"] = bool_field(p.mux.enabled);
    mux.fields["filter_bandwidth_ghz"] = number_field(p.mux.filter_bandwidth_ghz);
    mux.fields["drop_filter_loss_db"] = number_field(p.mux.drop_filter_loss_db);
    mux.fields["raman_coeff_per_km_nm"] = number_field(p.mux.raman_coeff_per_km_nm);
    mux.fields["wavelength_nm"] = number_field(p.mux.wavelength_nm);
    mux.fields["channels"] = [&p](const json& v, const std::string& path) {
        if (!v.is_array()) throw ConfigError(path + " must be an array");
        p.mux.channels.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            p.mux.channels.push_back(
                channel_from_json(v[i], path + "." + std::to_string(i) + "."));
        }
    };

    FieldMap top;
    top.fields["intensity"] = [&](const json& v, const std::string& path) {
        intensity.apply(v, path + ".");
    };
    top.fields["prob"] = [&](const json& v, const std::string& path) {
        prob.apply(v, path + ".");
    };
    top.fields["security"] = [&](const json& v, const std::string& path) {
        security.apply(v, path + ".");
    };
    top.fields["link"] = [&](const json& v, const std::string& path) {
        link.apply(v, path + ".");
    };
    top.fields["detector"] = [&](const json& v, const std::string& path) {
        detector.apply(v, path + ".");
    };
    top.fields["mux"] = [&](const json& v, const std::string& path) {
        mux.apply(v, path + ".");
    };
    top.apply(root, "");
    return p;
}

json params_to_json(const ProtocolParams& p) {
    json root;
    root["intensity"] = {{"u", p.intensity.u}, {"v", p.intensity.v}, {"w", p.intensity.w}};
    root["prob"] = {{"p_u", p.prob.p_u},
                    {"p_v", p.prob.p_v},
                    {"p_w", p.prob.p_w},
                    {"qz_alice", p.prob.qz_alice},
                    {"qz_bob", p.prob.qz_bob}};
    root["security"] = {{"eps_sec", p.security.eps_sec},
                        {"eps_cor", p.security.eps_cor},
                        {"f_ec", p.security.f_ec}};
    root["link"] = {{"length_km", p.link.length_km},
                    {"loss_coeff_db_per_km", p.link.loss_coeff_db_per_km},
                    {"extra_loss_db", p.link.extra_loss_db},
                    {"clock_hz", p.link.clock_hz},
                    {"session_pulses", p.link.session_pulses}};
    root["detector"] = {{"efficiency", p.detector.efficiency},
                        {"dark_cps", p.detector.dark_cps},
                        {"e_misalign", p.detector.e_misalign},
                        {"gate_width_s", p.detector.gate_width_s},
                        {"temperature_c", p.detector.temperature_c},
                        {"ref_dark_cps", p.detector.ref_dark_cps},
                        {"ref_temperature_c", p.detector.ref_temperature_c}};
    json channels = json::array();
    for (const MuxChannel& ch : p.mux.channels) {
        channels.push_back({{"launch_power_dbm", ch.launch_power_dbm},
                            {"role", ch.role == ChannelRole::Clock ? "clock" : "data"},
                            {"copropagating", ch.copropagating}});
    }
    root["mux"] = {{"enabled", p.mux.enabled},
                   {"filter_bandwidth_ghz", p.mux.filter_bandwidth_ghz},
                   {"drop_filter_loss_db", p.mux.drop_filter_loss_db},
                   {"raman_coeff_per_km_nm", p.mux.raman_coeff_per_km_nm},
                   {"wavelength_nm", p.mux.wavelength_nm},
                   {"channels", channels}};
    return root;
}

json default_channel_json() {
    return params_to_json([] {
        ProtocolParams p;
        p.mux.channels.push_back(MuxChannel{});
        return p;
    }())["mux"]["channels"][0];
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream stream(path);
    while (std::getline(stream, part, '.')) parts.push_back(part);
    return parts;
}

}  // namespace

ProtocolParams params_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("invalid JSON: ") + err.what());
    }
    return params_from_json(root);
}

ProtocolParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return params_from_json_text(text.str());
}

std::string params_to_json_text(const ProtocolParams& params) {
    return params_to_json(params).dump(2) + "\n";
}

void apply_override(ProtocolParams& params, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key.path=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value_text = assignment.substr(eq + 1);

    json root = params_to_json(params);
    json* node = &root;
    for (const std::string& part : split_path(path)) {
        if (node->is_array()) {
            char* end = nullptr;
            const long index = std::strtol(part.c_str(), &end, 10);
            if (end == part.c_str() || *end != '\0' || index < 0) {
                throw ConfigError("expected an array index at '" + part + "' in " + path);
            }
            if (static_cast<std::size_t>(index) == node->size()) {
                node->push_back(default_channel_json());  // grow-by-one append
            }
            if (static_cast<std::size_t>(index) >= node->size()) {
                throw ConfigError("array index out of range at '" + part + "' in " + path);
            }
            node = &(*node)[index];
        } else if (node->is_object()) {
            if (!node->contains(part)) {
                throw ConfigError("unknown key: " + path);
            }
            node = &(*node)[part];
        } else {
            throw ConfigError("path descends into a plain value: " + path);
        }
    }

    if (node->is_boolean()) {
        if (value_text == "true" || value_text == "1") {
            *node = true;
        } else if (value_text == "false" || value_text == "0") {
            *node = false;
        } else {
            throw ConfigError(path + " expects true or false, got '" + value_text + "'");
        }
    } else if (node->is_number()) {
        char* end = nullptr;
        const double value = std::strtod(value_text.c_str(), &end);
        if (end == value_text.c_str() || *end != '\0') {
            throw ConfigError(path + " expects a number, got '" + value_text + "'");
        }
        *node = value;
    } else if (node->is_string()) {
        *node = value_text;
    } else {
        throw ConfigError("cannot assign to '" + path + "'; pick a leaf field");
    }

    params = params_from_json(root);
}

}  // namespace qkd
