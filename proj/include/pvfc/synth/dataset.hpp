#pragma once

#include "pvfc/core/feature_frame.hpp"
#include "pvfc/features/build_frame.hpp"
#include "pvfc/synth/generator.hpp"

namespace pvfc::synth {

/// Tagged feature frame of one synthetic plant.
inline FeatureFrame plant_frame(const SynthData& site, const SynthPlant& plant, const features::FeatureRecipe& recipe) {
    const features::MeteorologyInputs met{site.ghi, site.dhi, site.temperature, site.rainfall, site.humidity};
    const features::SolarAngles angles{site.zenith, site.azimuth};
    return features::build_frame(plant.spec, plant_power(site, plant), met, angles, recipe, site.utc_offset_minutes);
}

/// Single-plant frame whose rating matches the generator's own power series.
inline FeatureFrame site_frame(const SynthData& site, const SynthConfig& cfg, const features::FeatureRecipe& recipe) {
    SynthPlant plant;
    plant.spec.plant_id = "synthetic";
    plant.spec.array_rating_kw = cfg.array_rating;
    return plant_frame(site, plant, recipe);
}

} // namespace pvfc::synth
