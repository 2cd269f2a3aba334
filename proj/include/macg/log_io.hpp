#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "macg/datagen.hpp"
#include "macg/domain.hpp"

namespace macg {

// Episode logs are stored as JSON lines: one header object with the schema
// version, the record counts and an echo of the generation config, then one
// line per ad profile, then one line per auction with inline participant
// features. Doubles survive the round trip bit-exactly.
inline constexpr int kLogSchemaVersion = 1;
inline constexpr const char* kLogSchemaName = "macg-log";

inline std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::Click: return "click";
        case ObjectiveKind::Gmv: return "gmv";
        case ObjectiveKind::Cart: return "cart";
        case ObjectiveKind::SelfBidding: return "self";
    }
    return "gmv";
}

inline ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "click") return ObjectiveKind::Click;
    if (s == "gmv") return ObjectiveKind::Gmv;
    if (s == "cart") return ObjectiveKind::Cart;
    if (s == "self") return ObjectiveKind::SelfBidding;
    throw DataError("unknown objective kind '" + s + "'");
}

inline void to_json(nlohmann::json& j, const GenConfig& cfg) {
    j = nlohmann::json{{"n_ads", cfg.n_ads},
                       {"n_auctions", cfg.n_auctions},
                       {"gmv_frac", cfg.gmv_frac},
                       {"cart_frac", cfg.cart_frac},
                       {"click_frac", cfg.click_frac},
                       {"self_bidding_frac", cfg.self_bidding_frac},
                       {"min_participants", cfg.min_participants},
                       {"max_participants", cfg.max_participants},
                       {"n_keywords", cfg.n_keywords},
                       {"seed", cfg.seed},
                       {"max_redraws", cfg.max_redraws},
                       {"ocpc_range", cfg.ocpc_range},
                       {"reserve_price", cfg.reserve_price}};
}

inline void from_json(const nlohmann::json& j, GenConfig& cfg) {
    cfg.n_ads = j.value("n_ads", cfg.n_ads);
    cfg.n_auctions = j.value("n_auctions", cfg.n_auctions);
    cfg.gmv_frac = j.value("gmv_frac", cfg.gmv_frac);
    cfg.cart_frac = j.value("cart_frac", cfg.cart_frac);
    cfg.click_frac = j.value("click_frac", cfg.click_frac);
    cfg.self_bidding_frac = j.value("self_bidding_frac", cfg.self_bidding_frac);
    cfg.min_participants = j.value("min_participants", cfg.min_participants);
    cfg.max_participants = j.value("max_participants", cfg.max_participants);
    cfg.n_keywords = j.value("n_keywords", cfg.n_keywords);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_redraws = j.value("max_redraws", cfg.max_redraws);
    cfg.ocpc_range = j.value("ocpc_range", cfg.ocpc_range);
    cfg.reserve_price = j.value("reserve_price", cfg.reserve_price);
}

namespace detail {

// Infinite budgets/caps are stored as null.
inline nlohmann::json cap_to_json(double v) {
    if (v == kInfinity) return nullptr;
    return v;
}

inline double cap_from_json(const nlohmann::json& j) {
    if (j.is_null()) return kInfinity;
    return j.get<double>();
}

}  // namespace detail

inline void write_log(const EpisodeLog& log, const std::filesystem::path& path,
                      const GenConfig* gen_echo = nullptr) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");

    nlohmann::json header{{"schema", kLogSchemaName},
                          {"version", kLogSchemaVersion},
                          {"n_ads", log.ads.size()},
                          {"n_auctions", log.auctions.size()}};
    if (gen_echo) header["gen"] = *gen_echo;
    out << header.dump() << '\n';

    for (const AdProfile& ad : log.ads) {
        nlohmann::json kw = nlohmann::json::array();
        for (const auto& [k, b] : ad.keyword_bids) kw.push_back({k, b});
        nlohmann::json j{{"type", "ad"},
                         {"id", ad.id},
                         {"kind", to_string(ad.kind)},
                         {"budget", detail::cap_to_json(ad.budget)},
                         {"ppc_cap", detail::cap_to_json(ad.ppc_cap)},
                         {"floor", ad.floor},
                         {"tk", ad.tk},
                         {"base_bid", ad.base_bid},
                         {"self_bid", ad.self_bid},
                         {"hist_cvr", ad.hist_cvr},
                         {"kw_bids", std::move(kw)}};
        out << j.dump() << '\n';
    }
    for (const AuctionEvent& ev : log.auctions) {
        nlohmann::json parts = nlohmann::json::array();
        for (const Participant& p : ev.participants)
            parts.push_back({p.ad, p.features.as_array()});
        nlohmann::json j{{"type", "auction"},
                         {"id", ev.id},
                         {"t", ev.timestamp},
                         {"kw", ev.keyword},
                         {"parts", std::move(parts)}};
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline EpisodeLog read_log(const std::filesystem::path& path, GenConfig* gen_echo = nullptr) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    auto fail = [&](std::size_t line_no, const std::string& what) -> DataError {
        return DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw fail(1, "missing header record");
    ++line_no;

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw fail(line_no, std::string("malformed header: ") + e.what());
    }
    if (header.value("schema", "") != kLogSchemaName)
        throw fail(line_no, "not a " + std::string(kLogSchemaName) + " file");
    const int version = header.value("version", -1);
    if (version != kLogSchemaVersion)
        throw fail(line_no, "unsupported schema version " + std::to_string(version) +
                                " (expected " + std::to_string(kLogSchemaVersion) + ")");
    const std::size_t n_ads = header.value("n_ads", std::size_t{0});
    const std::size_t n_auctions = header.value("n_auctions", std::size_t{0});
    if (gen_echo && header.contains("gen")) *gen_echo = header["gen"].get<GenConfig>();

    EpisodeLog log;
    log.ads.reserve(n_ads);
    log.auctions.reserve(n_auctions);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw fail(line_no, std::string("malformed record: ") + e.what());
        }
        try {
            const std::string type = j.at("type").get<std::string>();
            if (type == "ad") {
                AdProfile ad;
                ad.id = j.at("id").get<AdId>();
                ad.kind = objective_kind_from_string(j.at("kind").get<std::string>());
                ad.budget = detail::cap_from_json(j.at("budget"));
                ad.ppc_cap = detail::cap_from_json(j.at("ppc_cap"));
                ad.floor = j.at("floor").get<double>();
                ad.tk = j.at("tk").get<double>();
                ad.base_bid = j.at("base_bid").get<double>();
                ad.self_bid = j.at("self_bid").get<double>();
                ad.hist_cvr = j.at("hist_cvr").get<double>();
                for (const auto& kv : j.at("kw_bids"))
                    ad.keyword_bids[kv.at(0).get<int>()] = kv.at(1).get<double>();
                log.ads.push_back(std::move(ad));
            } else if (type == "auction") {
                AuctionEvent ev;
                ev.id = j.at("id").get<std::uint64_t>();
                ev.timestamp = j.at("t").get<Timestamp>();
                ev.keyword = j.at("kw").get<int>();
                for (const auto& pj : j.at("parts")) {
                    Participant p;
                    p.ad = pj.at(0).get<AdId>();
                    p.features = FeatureVector::from_array(
                        pj.at(1).get<std::array<double, kFeatureDim>>());
                    ev.participants.push_back(std::move(p));
                }
                log.auctions.push_back(std::move(ev));
            } else {
                throw DataError("unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw fail(line_no, std::string("bad record: ") + e.what());
        }
    }

    if (log.ads.size() != n_ads)
        throw fail(line_no, "truncated file: header promises " + std::to_string(n_ads) +
                                " ads, found " + std::to_string(log.ads.size()));
    if (log.auctions.size() != n_auctions)
        throw fail(line_no, "truncated file: header promises " + std::to_string(n_auctions) +
                                " auctions, found " + std::to_string(log.auctions.size()));

    log.build_index();
    validate(log);
    return log;
}

}  // namespace macg
