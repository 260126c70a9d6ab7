#include "casym/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "casym/csv.hpp"
#include "casym/errors.hpp"

namespace casym {

namespace {

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return m == 2 && leap ? 29 : kDays[m - 1];
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}
    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    void advance() { ++pos_; }
    int digits(std::size_t n) {
        if (pos_ + n > s_.size()) fail();
        int v = 0;
        for (std::size_t k = 0; k < n; ++k) {
            char c = s_[pos_ + k];
            if (!std::isdigit(static_cast<unsigned char>(c))) fail();
            v = v * 10 + (c - '0');
        }
        pos_ += n;
        return v;
    }
    void expect(char c) {
        if (peek() != c) fail();
        ++pos_;
    }
    [[noreturn]] void fail() const { throw ValidationError("invalid ISO 8601 timestamp '" + std::string(s_) + "'"); }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

} // namespace

std::int64_t parse_iso8601(std::string_view text) {
    Cursor c(text);
    int y = c.digits(4);
    c.expect('-');
    int mo = c.digits(2);
    c.expect('-');
    int d = c.digits(2);
    if (mo < 1 || mo > 12 || d < 1 || static_cast<unsigned>(d) > days_in_month(y, static_cast<unsigned>(mo)))
        c.fail();
    std::int64_t secs = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400;
    if (c.done()) return secs;
    if (c.peek() != 'T' && c.peek() != ' ') c.fail();
    c.advance();
    int hh = c.digits(2);
    c.expect(':');
    int mm = c.digits(2);
    int ss = 0;
    if (c.peek() == ':') {
        c.advance();
        ss = c.digits(2);
        if (c.peek() == '.' || c.peek() == ',') {
            c.advance();
            if (!std::isdigit(static_cast<unsigned char>(c.peek()))) c.fail();
            while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.advance();
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) c.fail();
    secs += hh * 3600 + mm * 60 + ss;
    if (c.done()) return secs;
    if (c.peek() == 'Z') {
        c.advance();
    } else if (c.peek() == '+' || c.peek() == '-') {
        int sign = c.peek() == '+' ? 1 : -1;
        c.advance();
        int oh = c.digits(2);
        int om = 0;
        if (c.peek() == ':') c.advance();
        if (!c.done()) om = c.digits(2);
        secs -= sign * (oh * 3600 + om * 60);
    } else {
        c.fail();
    }
    if (!c.done()) c.fail();
    return secs;
}

int parse_year_month(std::string_view text) {
    Cursor c(text);
    int y = c.digits(4);
    c.expect('-');
    int m = c.digits(2);
    if (!c.done() || m < 1 || m > 12) throw ValidationError("invalid month '" + std::string(text) + "', expected YYYY-MM");
    return y * 12 + (m - 1);
}

std::string format_year_month(int month_index) {
    int y = month_index / 12;
    int m = month_index % 12 + 1;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", y, m);
    return buf;
}

int month_of_timestamp(std::int64_t timestamp) {
    std::int64_t days = timestamp >= 0 ? timestamp / 86400 : -((-timestamp + 86399) / 86400);
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    return static_cast<int>(y * 12 + (m - 1));
}

std::vector<PostRecord> read_posts(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t ci = t.column("influencer_id");
    std::size_t ct = t.column("timestamp");
    std::size_t cl = t.column("topic");
    std::vector<PostRecord> out;
    for (const auto& row : t.rows) {
        PostRecord p;
        p.influencer_id = trim(row[ci]);
        if (p.influencer_id.empty()) throw ValidationError(path.string() + ": empty influencer_id");
        p.timestamp = parse_iso8601(trim(row[ct]));
        std::string topic = trim(row[cl]);
        if (!topic.empty()) {
            p.multi_label = topic.find('|') != std::string::npos;
            p.topic = topic;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<FollowerRecord> read_followers(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t ci = t.column("influencer_id");
    std::size_t cm = t.column("month");
    std::size_t cf = t.column("followers");
    std::vector<FollowerRecord> out;
    for (const auto& row : t.rows) {
        FollowerRecord r;
        r.influencer_id = trim(row[ci]);
        r.month_index = parse_year_month(trim(row[cm]));
        std::string f = trim(row[cf]);
        auto res = std::from_chars(f.data(), f.data() + f.size(), r.followers);
        if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || r.followers < 0)
            throw ValidationError(path.string() + ": followers must be a non-negative integer, got '" + f + "'");
        for (const auto& o : out)
            if (o.influencer_id == r.influencer_id && o.month_index == r.month_index)
                throw ValidationError(path.string() + ": duplicate record for " + r.influencer_id + " in " +
                                      format_year_month(r.month_index));
        out.push_back(std::move(r));
    }
    return out;
}

std::map<std::string, std::vector<PostRecord>> group_posts(std::span<const PostRecord> posts) {
    std::map<std::string, std::vector<PostRecord>> out;
    for (const auto& p : posts) out[p.influencer_id].push_back(p);
    for (auto& [id, v] : out)
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return out;
}

ConsistencyEstimate consistency_estimate(std::span<const PostRecord> posts) {
    std::map<std::string, std::size_t> counts;
    std::size_t labeled = 0;
    for (const auto& p : posts) {
        if (!p.labeled()) continue;
        ++counts[*p.topic];
        ++labeled;
    }
    if (labeled == 0) throw UndefinedStatisticError("no labeled posts, consistency cannot be estimated");
    ConsistencyEstimate e;
    e.labeled_posts = labeled;
    std::size_t best = 0;
    for (const auto& [label, n] : counts) {
        e.shares[label] = static_cast<double>(n) / static_cast<double>(labeled);
        if (n > best) {
            best = n;
            e.reference_topic = label;
            e.tie = false;
        } else if (n == best) {
            e.tie = true;
        }
    }
    e.consistency = static_cast<double>(best) / static_cast<double>(labeled);
    return e;
}

std::vector<double> normalized_autocovariance(std::span<const double> seq, std::size_t max_lag) {
    const std::size_t n = seq.size();
    if (n <= max_lag) throw std::invalid_argument("normalized_autocovariance: sequence must be longer than max_lag");
    const double N = static_cast<double>(n);
    double mu = std::accumulate(seq.begin(), seq.end(), 0.0) / N;
    double var = 0.0;
    for (double x : seq) var += (x - mu) * (x - mu);
    var /= N;
    if (!(var > 0.0)) throw UndefinedStatisticError("autocovariance undefined for a constant sequence");
    std::vector<double> out(max_lag + 1);
    out[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t k = 0; k + lag < n; ++k) s += (seq[k] - mu) * (seq[k + lag] - mu);
        out[lag] = s / static_cast<double>(n - lag) / var;
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
    if (x.size() < 2) throw UndefinedStatisticError("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double dx = x[k] - mx;
        double dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedStatisticError("pearson: correlation undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::map<std::string, std::vector<double>> indicator_sequences(std::span<const PostRecord> posts,
                                                               const std::string& reference,
                                                               const std::vector<std::string>& topics) {
    std::vector<const PostRecord*> labeled;
    for (const auto& p : posts)
        if (p.labeled()) labeled.push_back(&p);
    std::stable_sort(labeled.begin(), labeled.end(),
                     [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });
    std::map<std::string, std::vector<double>> out;
    for (const auto& t : topics) {
        if (t == reference) continue;
        std::vector<double> seq;
        seq.reserve(labeled.size());
        for (const auto* p : labeled) seq.push_back(*p->topic == t ? 1.0 : 0.0);
        out[t] = std::move(seq);
    }
    return out;
}

MonthlySeries align_monthly(std::span<const PostRecord> posts, std::span<const FollowerRecord> followers) {
    std::map<int, std::int64_t> snap;
    for (const auto& f : followers) snap[f.month_index] = f.followers;
    std::map<int, double> counts;
    for (const auto& p : posts) counts[month_of_timestamp(p.timestamp)] += 1.0;

    MonthlySeries s;
    for (auto it = snap.begin(); it != snap.end(); ++it) {
        auto next = std::next(it);
        if (next == snap.end() || next->first != it->first + 1) continue;
        if (it->second == 0) {
            s.warnings.push_back(format_year_month(it->first) + ": zero starting followers, month excluded");
            continue;
        }
        s.months.push_back(it->first);
        auto c = counts.find(it->first);
        s.post_counts.push_back(c == counts.end() ? 0.0 : c->second);
        s.growth.push_back(static_cast<double>(next->second - it->second) / static_cast<double>(it->second));
    }
    return s;
}

PearsonResult posts_followers_pearson(std::span<const PostRecord> posts, std::span<const FollowerRecord> followers) {
    PearsonResult r;
    r.series = align_monthly(posts, followers);
    if (r.series.months.size() < 3) throw UndefinedStatisticError("pearson: need at least 3 aligned months");
    r.r = pearson(r.series.post_counts, r.series.growth);
    return r;
}

} // namespace casym
