#include "emleak/jammer_planner.hpp"

#include "emleak/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace emleak {

namespace {

// Indices into `entries` by descending power, ties by ascending k.
std::vector<std::size_t> power_order(const std::vector<SignatureEntry>& entries) {
    std::vector<std::size_t> idx(entries.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (entries[a].predicted_rel_power != entries[b].predicted_rel_power)
            return entries[a].predicted_rel_power > entries[b].predicted_rel_power;
        return entries[a].k < entries[b].k;
    });
    return idx;
}

}  // namespace

DeviceProfile load_device_profile(const std::filesystem::path& path, const ModeTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        DeviceProfile p;
        p.model_name = j.at("model_name").get<std::string>();
        p.mode = table.lookup(j.at("mode").get<std::string>());
        if (auto it = j.find("interface_image"); it != j.end() && !it->is_null()) {
            std::filesystem::path img = it->get<std::string>();
            if (img.is_relative()) img = path.parent_path() / img;
            p.interface_image_path = img;
        }
        p.environment_notes = j.value("environment_notes", std::string());
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed profile '" + path.string() + "': " + e.what());
    }
}

JamPlan plan_jamming(const DeviceProfile& profile, const FrameImage& interface_image, const PulseSpec& pulse,
                     int k_max, double guard_factor) {
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    if (!(guard_factor >= 1.0)) throw InvalidArgument("guard factor must be >= 1");

    JamPlan plan;
    plan.source_signature = signature_from_public_image(interface_image, profile.mode, pulse, k_max);
    const double bandwidth = guard_factor * 2.0 * line_rate(profile.mode);
    const auto& entries = plan.source_signature.entries;
    plan.bands.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        plan.bands[i] = {entries[i].k, entries[i].center_freq_hz, bandwidth, 0};
    const auto order = power_order(entries);
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        plan.bands[order[rank]].priority = static_cast<int>(rank) + 1;

    plan.zero_power = std::all_of(entries.begin(), entries.end(),
                                  [](const SignatureEntry& e) { return e.predicted_rel_power == 0.0; });
    if (plan.zero_power) plan.notes.push_back("interface image predicts no emission; priorities follow harmonic order");
    if (!profile.environment_notes.empty()) plan.notes.push_back("environment: " + profile.environment_notes);
    return plan;
}

JamPlan plan_jamming(const DeviceProfile& profile, const PulseSpec& pulse, int k_max, double guard_factor) {
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    if (!(guard_factor >= 1.0)) throw InvalidArgument("guard factor must be >= 1");
    if (profile.interface_image_path) {
        const FrameImage img = load_image(*profile.interface_image_path);
        return plan_jamming(profile, img, pulse, k_max, guard_factor);
    }
    // No public image: assume the maximal-emission white frame.
    JamPlan plan = plan_jamming(profile, test_card(TestCard::white, profile.mode), pulse, k_max, guard_factor);
    plan.notes.insert(plan.notes.begin(), "no interface image; planned against a white frame");
    return plan;
}

std::vector<RankedHarmonic> rank_compromising_frequencies(const SpectralSignature& sig, double noise_floor_rel) {
    std::vector<RankedHarmonic> out;
    for (std::size_t i : power_order(sig.entries)) {
        const auto& e = sig.entries[i];
        if (e.predicted_rel_power > noise_floor_rel) out.push_back({e.k, e.center_freq_hz});
    }
    return out;
}

nlohmann::json to_json(const JamPlan& plan) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : plan.bands)
        bands.push_back({{"k", b.k}, {"center_freq_hz", b.center_freq_hz}, {"bandwidth_hz", b.bandwidth_hz},
                         {"priority", b.priority}});
    return {{"bands", bands},
            {"source_signature", to_json(plan.source_signature)},
            {"zero_power", plan.zero_power},
            {"notes", plan.notes}};
}

std::string to_flat_text(const JamPlan& plan) {
    std::vector<const JamBand*> ordered;
    for (const auto& b : plan.bands) ordered.push_back(&b);
    std::sort(ordered.begin(), ordered.end(), [](const JamBand* a, const JamBand* b) { return a->priority < b->priority; });
    std::string out;
    char line[128];
    for (const JamBand* b : ordered) {
        std::snprintf(line, sizeof line, "%.3f %.3f %d\n", b->center_freq_hz, b->bandwidth_hz, b->priority);
        out += line;
    }
    return out;
}

}  // namespace emleak
