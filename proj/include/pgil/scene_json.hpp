#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pgil/sar_synth.hpp"

namespace pgil {

// JSON schema for scene layouts (see README for a worked example):
// {
//   "height": H, "width": W,
//   "coherency_specs": [
//     {"name": "...", "preset": "surface|double-bounce|volume", "scale": 1.0}
//     | {"name": "...", "dim": d, "matrix": [[[re,im], ...], ...]}
//   ],
//   "classes": [
//     {"name": "...",
//      "mixture": [{"spec": i, "weight": w}, ...],
//      "background_power": p,
//      "targets": [{"row": r, "col": c, "amplitude": a,
//                   "signature": {"rows": nr, "cols": na, "gains": [[re,im], ...]}}]}
//   ],
//   "regions": [{"row": r, "col": c, "height": h, "width": w, "class": k}]
// }
inline SceneLayout scene_layout_from_json(const nlohmann::json& j) {
    SceneLayout layout;
    layout.height = j.at("height").get<int>();
    layout.width = j.at("width").get<int>();

    if (j.contains("coherency_specs")) {
        for (const auto& js : j.at("coherency_specs")) {
            CoherencySpec spec;
            spec.name = js.value("name", "");
            if (js.contains("preset")) {
                std::string preset = js.at("preset").get<std::string>();
                if (preset == "surface")
                    spec = surface_spec();
                else if (preset == "double-bounce")
                    spec = double_bounce_spec();
                else if (preset == "volume")
                    spec = volume_spec();
                else
                    throw std::invalid_argument("scene layout: unknown preset '" + preset + "'");
                if (js.contains("name")) spec.name = js.at("name").get<std::string>();
                spec.matrix *= js.value("scale", 1.0);
            } else {
                spec.dim = js.at("dim").get<int>();
                spec.matrix = CMat(spec.dim);
                const auto& rows = js.at("matrix");
                if (static_cast<int>(rows.size()) != spec.dim)
                    throw std::invalid_argument("scene layout: matrix row count != dim");
                for (int r = 0; r < spec.dim; ++r) {
                    if (static_cast<int>(rows[r].size()) != spec.dim)
                        throw std::invalid_argument("scene layout: matrix is not square");
                    for (int c = 0; c < spec.dim; ++c)
                        spec.matrix.at(r, c) = cd(rows[r][c].at(0).get<double>(),
                                                  rows[r][c].at(1).get<double>());
                }
            }
            layout.specs.push_back(spec);
        }
    }

    for (const auto& jc : j.at("classes")) {
        ClassSpec cls;
        cls.name = jc.value("name", "");
        if (jc.contains("mixture"))
            for (const auto& jm : jc.at("mixture"))
                cls.mixture.push_back({jm.at("spec").get<int>(), jm.at("weight").get<double>()});
        cls.background_power = jc.value("background_power", 0.0);
        if (jc.contains("targets")) {
            for (const auto& jt : jc.at("targets")) {
                PointTarget t;
                t.row = jt.at("row").get<int>();
                t.col = jt.at("col").get<int>();
                t.amplitude = jt.value("amplitude", 1.0);
                const auto& sig = jt.at("signature");
                t.sig_rows = sig.at("rows").get<int>();
                t.sig_cols = sig.at("cols").get<int>();
                for (const auto& g : sig.at("gains"))
                    t.gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
                cls.targets.push_back(std::move(t));
            }
        }
        layout.classes.push_back(std::move(cls));
    }

    for (const auto& jr : j.at("regions"))
        layout.regions.push_back({jr.at("row").get<int>(), jr.at("col").get<int>(),
                                  jr.at("height").get<int>(), jr.at("width").get<int>(),
                                  jr.at("class").get<int>()});

    layout.validate();
    return layout;
}

}  // namespace pgil
