#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace casym {

struct PostRecord {
    std::string influencer_id;
    std::int64_t timestamp = 0;  // seconds since 1970-01-01 UTC
    std::optional<std::string> topic;
    bool multi_label = false;    // topic field listed several labels separated by '|'

    [[nodiscard]] bool labeled() const { return topic.has_value() && !multi_label; }
};

struct FollowerRecord {
    std::string influencer_id;
    int month_index = 0;  // year * 12 + (month - 1)
    std::int64_t followers = 0;
};

// "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.frac]]" with optional "Z" or +-HH:MM.
[[nodiscard]] std::int64_t parse_iso8601(std::string_view text);
// "YYYY-MM" -> year * 12 + (month - 1)
[[nodiscard]] int parse_year_month(std::string_view text);
[[nodiscard]] std::string format_year_month(int month_index);
[[nodiscard]] int month_of_timestamp(std::int64_t timestamp);

[[nodiscard]] std::vector<PostRecord> read_posts(const std::filesystem::path& path);
[[nodiscard]] std::vector<FollowerRecord> read_followers(const std::filesystem::path& path);

// Posts grouped per influencer, each group sorted by timestamp (stable).
[[nodiscard]] std::map<std::string, std::vector<PostRecord>> group_posts(std::span<const PostRecord> posts);

struct ConsistencyEstimate {
    std::string reference_topic;
    double consistency = 0.0;
    std::size_t labeled_posts = 0;
    bool tie = false;
    std::map<std::string, double> shares;
};

// Throws UndefinedStatisticError when no post carries a single label.
[[nodiscard]] ConsistencyEstimate consistency_estimate(std::span<const PostRecord> posts);

// Sample autocorrelation at lags 0..max_lag: lag sums over (N - i), mean and
// variance over the full sample (divide by N).
[[nodiscard]] std::vector<double> normalized_autocovariance(std::span<const double> seq, std::size_t max_lag);

[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

// One 0/1 sequence per topic in `topics` other than `reference`, over the
// labeled posts in chronological order.
[[nodiscard]] std::map<std::string, std::vector<double>> indicator_sequences(
    std::span<const PostRecord> posts, const std::string& reference, const std::vector<std::string>& topics);

struct MonthlySeries {
    std::vector<int> months;
    std::vector<double> post_counts;
    std::vector<double> growth;  // (next - current) / current
    std::vector<std::string> warnings;
};

// Pairs the post count of each month with the relative follower change over
// that month (snapshot of the month to snapshot of the following month).
[[nodiscard]] MonthlySeries align_monthly(std::span<const PostRecord> posts,
                                          std::span<const FollowerRecord> followers);

struct PearsonResult {
    double r = 0.0;
    MonthlySeries series;
};

// Throws UndefinedStatisticError with fewer than 3 months or a constant series.
[[nodiscard]] PearsonResult posts_followers_pearson(std::span<const PostRecord> posts,
                                                    std::span<const FollowerRecord> followers);

} // namespace casym
