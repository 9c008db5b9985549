#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pvfc {

enum class Temporal { TimeVarying, Static };
enum class Knowledge { Known, Unknown };
enum class Kind { Real, Categorical };

/// Availability tag of a feature: time-varying or static, known or unknown
/// over the forecast horizon, real or categorical.
class FeatureTag {
public:
    constexpr FeatureTag() = default;

    static FeatureTag make(Temporal temporal, Knowledge knowledge, Kind kind) {
        require(!(temporal == Temporal::Static && knowledge == Knowledge::Unknown),
                ErrorCode::InvalidArgument, "static features are always known");
        FeatureTag tag;
        tag.temporal_ = temporal;
        tag.knowledge_ = knowledge;
        tag.kind_ = kind;
        return tag;
    }

    static FeatureTag known_real() { return make(Temporal::TimeVarying, Knowledge::Known, Kind::Real); }
    static FeatureTag unknown_real() { return make(Temporal::TimeVarying, Knowledge::Unknown, Kind::Real); }
    static FeatureTag known_categorical() {
        return make(Temporal::TimeVarying, Knowledge::Known, Kind::Categorical);
    }
    static FeatureTag unknown_categorical() {
        return make(Temporal::TimeVarying, Knowledge::Unknown, Kind::Categorical);
    }
    static FeatureTag static_real() { return make(Temporal::Static, Knowledge::Known, Kind::Real); }
    static FeatureTag static_categorical() {
        return make(Temporal::Static, Knowledge::Known, Kind::Categorical);
    }

    constexpr Temporal temporal() const noexcept { return temporal_; }
    constexpr Knowledge knowledge() const noexcept { return knowledge_; }
    constexpr Kind kind() const noexcept { return kind_; }
    constexpr bool is_static() const noexcept { return temporal_ == Temporal::Static; }
    constexpr bool is_known() const noexcept { return knowledge_ == Knowledge::Known; }
    constexpr bool is_real() const noexcept { return kind_ == Kind::Real; }

    /// e.g. `time_varying_unknown_real`, `static_categorical`.
    std::string to_string() const {
        std::string s = is_static() ? "static" : (is_known() ? "time_varying_known" : "time_varying_unknown");
        s += is_real() ? "_real" : "_categorical";
        return s;
    }

    static FeatureTag parse(std::string_view text) {
        for (auto t : {Temporal::TimeVarying, Temporal::Static}) {
            for (auto k : {Knowledge::Known, Knowledge::Unknown}) {
                for (auto c : {Kind::Real, Kind::Categorical}) {
                    if (t == Temporal::Static && k == Knowledge::Unknown) {
                        continue;
                    }
                    const FeatureTag tag = make(t, k, c);
                    if (tag.to_string() == text) {
                        return tag;
                    }
                }
            }
        }
        fail(ErrorCode::InvalidArgument, "unknown feature tag '" + std::string(text) + "'");
    }

    friend constexpr bool operator==(const FeatureTag&, const FeatureTag&) = default;

private:
    Temporal temporal_ = Temporal::TimeVarying;
    Knowledge knowledge_ = Knowledge::Unknown;
    Kind kind_ = Kind::Real;
};

/// Time-varying column. Categorical columns store vocabulary ids as doubles
/// so both kinds share the missing sentinel.
struct Column {
    std::string name;
    FeatureTag tag;
    std::vector<double> data;
    std::vector<std::string> vocabulary;
    std::string unit;
};

struct StaticField {
    std::string name;
    FeatureTag tag;
    double value = 0.0;
    std::vector<std::string> vocabulary;
    std::string unit;
};

inline std::size_t category_id(std::span<const std::string> vocabulary, std::string_view label) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), label);
    if (it == vocabulary.end()) {
        fail(ErrorCode::UnknownCategory, "category '" + std::string(label) + "' not in vocabulary");
    }
    return static_cast<std::size_t>(it - vocabulary.begin());
}

/// Set of tagged columns over a shared timestamp index. The index is strictly
/// increasing on the resolution grid; it may skip whole blocks (split outputs).
class FeatureFrame {
public:
    FeatureFrame(std::vector<Timestamp> index, Duration resolution, int utc_offset_minutes = 0)
        : index_(std::move(index)), resolution_(resolution), utc_offset_minutes_(utc_offset_minutes) {
        require(resolution_.count() > 0, ErrorCode::InvalidArgument, "resolution must be positive");
        for (std::size_t i = 1; i < index_.size(); ++i) {
            const auto step = (index_[i] - index_[i - 1]).count();
            require(step > 0 && step % resolution_.count() == 0, ErrorCode::Misaligned,
                    "frame index must be strictly increasing on the resolution grid");
        }
    }

    static FeatureFrame contiguous(Timestamp start, Duration resolution, std::size_t rows,
                                   int utc_offset_minutes = 0) {
        std::vector<Timestamp> index(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            index[i] = start + resolution * static_cast<std::int64_t>(i);
        }
        return FeatureFrame(std::move(index), resolution, utc_offset_minutes);
    }

    std::span<const Timestamp> index() const noexcept { return index_; }
    std::size_t size() const noexcept { return index_.size(); }
    bool empty() const noexcept { return index_.empty(); }
    Duration resolution() const noexcept { return resolution_; }
    int utc_offset_minutes() const noexcept { return utc_offset_minutes_; }

    bool is_contiguous() const noexcept {
        for (std::size_t i = 1; i < index_.size(); ++i) {
            if (index_[i] - index_[i - 1] != resolution_) {
                return false;
            }
        }
        return true;
    }

    std::size_t row_of(Timestamp t) const {
        const auto it = std::lower_bound(index_.begin(), index_.end(), t);
        if (it == index_.end() || *it != t) {
            return npos;
        }
        return static_cast<std::size_t>(it - index_.begin());
    }

    void add_column(Column column) {
        require(!column.tag.is_static(), ErrorCode::InvalidArgument,
                "column '" + column.name + "' is static; use add_static");
        require(column.data.size() == index_.size(), ErrorCode::Misaligned,
                "column '" + column.name + "' length differs from index");
        require(!has_column(column.name) && !has_static(column.name), ErrorCode::DuplicateColumn,
                "duplicate column '" + column.name + "'");
        if (!column.tag.is_real()) {
            for (double id : column.data) {
                require(is_missing(id) || (id >= 0 && std::floor(id) == id &&
                                           static_cast<std::size_t>(id) < column.vocabulary.size()),
                        ErrorCode::UnknownCategory,
                        "column '" + column.name + "' references an unregistered category");
            }
        }
        columns_.push_back(std::move(column));
    }

    void add_real(std::string name, FeatureTag tag, std::vector<double> data, std::string unit = {}) {
        add_column(Column{std::move(name), tag, std::move(data), {}, std::move(unit)});
    }

    void add_categorical(std::string name, FeatureTag tag, std::vector<double> ids,
                         std::vector<std::string> vocabulary) {
        add_column(Column{std::move(name), tag, std::move(ids), std::move(vocabulary), {}});
    }

    void add_static(StaticField field) {
        require(field.tag.is_static(), ErrorCode::InvalidArgument,
                "field '" + field.name + "' is not tagged static");
        require(!has_column(field.name) && !has_static(field.name), ErrorCode::DuplicateColumn,
                "duplicate column '" + field.name + "'");
        if (!field.tag.is_real()) {
            require(field.value >= 0 && static_cast<std::size_t>(field.value) < field.vocabulary.size(),
                    ErrorCode::UnknownCategory, "static field '" + field.name + "' out of vocabulary");
        }
        statics_.push_back(std::move(field));
    }

    bool has_column(std::string_view name) const noexcept { return find(name) != nullptr; }
    bool has_static(std::string_view name) const noexcept { return find_static(name) != nullptr; }

    const Column& column(std::string_view name) const {
        const Column* c = find(name);
        if (c == nullptr) {
            fail(ErrorCode::MissingColumn, "no column '" + std::string(name) + "'");
        }
        return *c;
    }

    const StaticField& static_field(std::string_view name) const {
        const StaticField* f = find_static(name);
        if (f == nullptr) {
            fail(ErrorCode::MissingColumn, "no static field '" + std::string(name) + "'");
        }
        return *f;
    }

    std::span<const Column> columns() const noexcept { return columns_; }
    std::span<const StaticField> statics() const noexcept { return statics_; }

    /// Replaces the data of an existing column (same tag, same length).
    void replace_data(std::string_view name, std::vector<double> data) {
        Column* c = find_mut(name);
        require(c != nullptr, ErrorCode::MissingColumn, "no column '" + std::string(name) + "'");
        require(data.size() == index_.size(), ErrorCode::Misaligned, "length differs from index");
        c->data = std::move(data);
    }

    void drop_column(std::string_view name) {
        const auto it = std::find_if(columns_.begin(), columns_.end(),
                                     [&](const Column& c) { return c.name == name; });
        require(it != columns_.end(), ErrorCode::MissingColumn, "no column '" + std::string(name) + "'");
        columns_.erase(it);
    }

    /// Contiguous view of one column (requires a gap-free index).
    TimeSeries series(std::string_view name) const {
        require(is_contiguous() && !empty(), ErrorCode::Misaligned,
                "series() needs a contiguous, non-empty frame");
        const Column& c = column(name);
        return TimeSeries(index_.front(), resolution_, c.data, c.unit);
    }

    FeatureFrame select_rows(std::span<const std::size_t> rows) const {
        std::vector<Timestamp> index;
        index.reserve(rows.size());
        for (std::size_t r : rows) {
            index.push_back(index_.at(r));
        }
        FeatureFrame out(std::move(index), resolution_, utc_offset_minutes_);
        for (const Column& c : columns_) {
            Column copy{c.name, c.tag, {}, c.vocabulary, c.unit};
            copy.data.reserve(rows.size());
            for (std::size_t r : rows) {
                copy.data.push_back(c.data[r]);
            }
            out.columns_.push_back(std::move(copy));
        }
        out.statics_ = statics_;
        return out;
    }

    FeatureFrame slice(std::size_t begin, std::size_t end) const {
        require(begin <= end && end <= size(), ErrorCode::InvalidArgument, "invalid slice");
        std::vector<std::size_t> rows(end - begin);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i] = begin + i;
        }
        return select_rows(rows);
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    const Column* find(std::string_view name) const noexcept {
        for (const Column& c : columns_) {
            if (c.name == name) {
                return &c;
            }
        }
        return nullptr;
    }
    Column* find_mut(std::string_view name) noexcept {
        for (Column& c : columns_) {
            if (c.name == name) {
                return &c;
            }
        }
        return nullptr;
    }
    const StaticField* find_static(std::string_view name) const noexcept {
        for (const StaticField& f : statics_) {
            if (f.name == name) {
                return &f;
            }
        }
        return nullptr;
    }

    std::vector<Timestamp> index_;
    Duration resolution_;
    int utc_offset_minutes_ = 0;
    std::vector<Column> columns_;
    std::vector<StaticField> statics_;
};

/// Intersects the indices of several frames and merges their columns.
inline FeatureFrame align(std::span<const FeatureFrame> frames) {
    require(!frames.empty(), ErrorCode::InvalidArgument, "align needs at least one frame");
    const Duration resolution = frames.front().resolution();
    std::vector<Timestamp> common(frames.front().index().begin(), frames.front().index().end());
    for (const FeatureFrame& f : frames.subspan(1)) {
        require(f.resolution() == resolution, ErrorCode::Misaligned, "frames differ in resolution");
        std::vector<Timestamp> next;
        std::set_intersection(common.begin(), common.end(), f.index().begin(), f.index().end(),
                              std::back_inserter(next));
        common = std::move(next);
    }
    require(!common.empty(), ErrorCode::EmptyIntersection, "frames share no timestamps");

    FeatureFrame out(common, resolution, frames.front().utc_offset_minutes());
    for (const FeatureFrame& f : frames) {
        std::vector<std::size_t> rows;
        rows.reserve(common.size());
        for (Timestamp t : common) {
            rows.push_back(f.row_of(t));
        }
        for (const Column& c : f.columns()) {
            Column copy{c.name, c.tag, {}, c.vocabulary, c.unit};
            copy.data.reserve(rows.size());
            for (std::size_t r : rows) {
                copy.data.push_back(c.data[r]);
            }
            out.add_column(std::move(copy));
        }
        for (const StaticField& s : f.statics()) {
            out.add_static(s);
        }
    }
    return out;
}

inline FeatureFrame align(std::initializer_list<FeatureFrame> frames) {
    return align(std::span<const FeatureFrame>(frames.begin(), frames.size()));
}

} // namespace pvfc
