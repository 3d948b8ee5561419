#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace iochunk {
namespace {

ParsedFrame frame_from(std::string_view letters, std::vector<std::string> names, std::string_view text) {
    Schema s;
    s.types = parse_type_letters(letters);
    s.names = std::move(names);
    return parse_frame(text, s);
}

std::vector<std::string> int_levels(int lo, int hi) {
    std::vector<std::string> out;
    for (int v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
    return out;
}

// Reference expansion: one-hot over every level by label comparison, then
// the baseline column removed.
DenseMatrix<double> brute_force(const Frame& f, const TermSpec& spec) {
    auto cell_text = [&](const Column& c, std::size_t i) {
        return c.type == ColumnType::Integer ? std::to_string(c.as<std::int64_t>()[i]) : c.as<std::string>()[i];
    };
    auto cell_num = [&](const Column& c, std::size_t i) {
        return c.type == ColumnType::Integer ? static_cast<double>(c.as<std::int64_t>()[i]) : c.as<double>()[i];
    };
    std::vector<double> data;
    std::size_t rows = 0, width = 0;
    for (std::size_t i = 0; i < f.n_rows; ++i) {
        bool skip = f.column(spec.response).is_null(i);
        for (const auto& t : spec.terms) skip = skip || f.column(term_column(t)).is_null(i);
        if (skip) continue;
        std::vector<double> row;
        if (spec.intercept) row.push_back(1);
        row.push_back(cell_num(f.column(spec.response), i));
        for (const auto& t : spec.terms) {
            const Column& c = f.column(term_column(t));
            if (auto* n = std::get_if<NumericTerm>(&t)) {
                (void)n;
                row.push_back(cell_num(c, i));
                continue;
            }
            const auto& levels = std::get<FactorTerm>(t).levels;
            std::vector<double> onehot(levels.size(), 0.0);
            for (std::size_t k = 0; k < levels.size(); ++k)
                if (levels[k] == cell_text(c, i)) onehot[k] = 1;
            row.insert(row.end(), onehot.begin() + 1, onehot.end());
        }
        width = row.size();
        data.insert(data.end(), row.begin(), row.end());
        ++rows;
    }
    return DenseMatrix<double>(rows, width, std::move(data));
}

TEST(NormalizeHhmm, Examples) {
    EXPECT_EQ(normalize_hhmm(130), 90);
    EXPECT_EQ(normalize_hhmm(0), 0);
    EXPECT_EQ(normalize_hhmm(2359), 1439);
    EXPECT_EQ(normalize_hhmm(2400), 1440);
    EXPECT_EQ(normalize_hhmm(5), 5);
    EXPECT_EQ(normalize_hhmm(std::nullopt), std::nullopt);
}

TEST(NormalizeHhmm, MatchesZeroPaddedSubstringRule) {
    for (std::int64_t v = 0; v <= 9999; ++v) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(v));
        std::int64_t want = std::stoll(std::string(buf, 2)) * 60 + std::stoll(std::string(buf + 2, 2));
        ASSERT_EQ(normalize_hhmm(v), want) << v;
    }
}

TEST(NormalizeHhmm, OutOfRange) {
    for (std::int64_t bad : {-1, 10000}) {
        try {
            normalize_hhmm(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
        }
    }
}

TEST(NormalizeHhmm, ColumnInPlace) {
    auto r = frame_from("i,i", {"DepTime", "y"}, "130,1\nNA,2\n2359,3\n");
    normalize_hhmm_column(r.frame, "DepTime");
    const Column& c = r.frame.column("DepTime");
    EXPECT_EQ(c.as<std::int64_t>()[0], 90);
    EXPECT_TRUE(c.is_null(1));
    EXPECT_EQ(c.as<std::int64_t>()[2], 1439);
    EXPECT_THROW(normalize_hhmm_column(r.frame, "nope"), Error);
}

TEST(Expand, TreatmentContrastToyFrame) {
    auto r = frame_from("r,c", {"y", "g"}, "1,a\n2,b\n");
    TermSpec spec{"y", {FactorTerm{"g", {"a", "b"}}}, true};
    auto e = expand(r.frame, spec);
    EXPECT_EQ(e.matrix.n_rows(), 2u);
    EXPECT_EQ(e.matrix.data(), (std::vector<double>{1, 1, 0, 1, 2, 1}));
    EXPECT_EQ(model_column_names(spec), (std::vector<std::string>{"(Intercept)", "y", "gb"}));
    EXPECT_EQ(e.dropped(), 0u);
}

TEST(Expand, DayOfWeekColumnNames) {
    TermSpec spec{"ArrDelay", {FactorTerm{"DayOfWeek", int_levels(1, 7)}}, true};
    auto names = model_column_names(spec);
    ASSERT_EQ(names.size(), 8u);
    for (int d = 2; d <= 7; ++d) EXPECT_EQ(names[static_cast<std::size_t>(d)], "DayOfWeek" + std::to_string(d));
}

TEST(Expand, AirlineLayout) {
    TermSpec spec{"ArrDelay",
                  {FactorTerm{"DayOfWeek", int_levels(1, 7)}, NumericTerm{"DepTime"}, NumericTerm{"DepDelay"},
                   FactorTerm{"Month", int_levels(1, 12)}},
                  true};
    auto names = model_column_names(spec);
    std::vector<std::string> want{"(Intercept)", "ArrDelay"};
    for (int d = 2; d <= 7; ++d) want.push_back("DayOfWeek" + std::to_string(d));
    want.push_back("DepTime");
    want.push_back("DepDelay");
    for (int m = 2; m <= 12; ++m) want.push_back("Month" + std::to_string(m));
    EXPECT_EQ(names, want);
}

TEST(Expand, ListwiseDeletion) {
    auto r = frame_from("r,i,r", {"y", "g", "x"}, "1,1,5\nNA,2,6\n3,NA,7\n4,2,NA\n5,2,9\n");
    TermSpec spec{"y", {FactorTerm{"g", {"1", "2"}}, NumericTerm{"x"}}, true};
    auto e = expand(r.frame, spec);
    EXPECT_EQ(e.matrix.n_rows(), 2u);
    EXPECT_EQ(e.dropped_null, 3u);
    EXPECT_EQ(e.matrix.data(), (std::vector<double>{1, 1, 0, 5, 1, 5, 1, 9}));
}

TEST(Expand, UnusedColumnsDoNotDropRows) {
    auto r = frame_from("r,r,c", {"y", "x", "junk"}, "1,2,NA\n");
    auto e = expand(r.frame, TermSpec{"y", {NumericTerm{"x"}}, false});
    EXPECT_EQ(e.matrix.n_rows(), 1u);
    EXPECT_EQ(e.matrix.data(), (std::vector<double>{1, 2}));
}

TEST(Expand, UnknownLevelStrictAndLenient) {
    auto r = frame_from("r,c", {"y", "g"}, "1,a\n2,z\n3,b\n");
    TermSpec spec{"y", {FactorTerm{"g", {"a", "b"}}}, true};
    try {
        expand(r.frame, spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownLevel);
    }
    auto e = expand(r.frame, spec, ExpandOptions{true});
    EXPECT_EQ(e.matrix.n_rows(), 2u);
    EXPECT_EQ(e.dropped_unknown_level, 1u);
}

TEST(Expand, ErrorsOnBadSpecs) {
    auto r = frame_from("r,c,c", {"y", "g", "s"}, "1,a,x\n");
    auto kind_of = [&](const TermSpec& spec) {
        try {
            expand(r.frame, spec);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::WorkerFailure;  // sentinel: nothing thrown
    };
    EXPECT_EQ(kind_of(TermSpec{"missing", {}, true}), ErrorKind::MissingColumn);
    EXPECT_EQ(kind_of(TermSpec{"y", {NumericTerm{"missing"}}, true}), ErrorKind::MissingColumn);
    EXPECT_EQ(kind_of(TermSpec{"y", {NumericTerm{"s"}}, true}), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of(TermSpec{"y", {FactorTerm{"g", {"a", "a"}}}, true}), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of(TermSpec{"y", {FactorTerm{"g", {"a", ""}}}, true}), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of(TermSpec{"g", {}, true}), ErrorKind::SchemaError);
}

TEST(Expand, MatchesBruteForceOracle) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> lvl(0, 4), num(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        std::size_t n = 1 + static_cast<std::size_t>(num(rng) + 50);
        for (std::size_t i = 0; i < n; ++i) {
            auto maybe_na = [&](std::string v) { return lvl(rng) == 0 && num(rng) > 40 ? std::string("NA") : v; };
            text += maybe_na(std::to_string(num(rng))) + "," + maybe_na(std::to_string(1 + lvl(rng))) + "," +
                    maybe_na(std::to_string(num(rng) / 4.0)) + "," + maybe_na(std::string(1, char('p' + lvl(rng)))) + "\n";
        }
        auto r = frame_from("r,i,r,c", {"y", "day", "x", "code"}, text);
        TermSpec spec{"y",
                      {FactorTerm{"day", {"3", "1", "2", "4", "5"}}, NumericTerm{"x"},
                       FactorTerm{"code", {"p", "q", "r", "s", "t"}}},
                      trial % 2 == 0};
        auto e = expand(r.frame, spec);
        auto oracle = brute_force(r.frame, spec);
        ASSERT_EQ(e.matrix.n_rows(), oracle.n_rows());
        ASSERT_EQ(e.matrix.data(), oracle.data());
        EXPECT_EQ(e.matrix.n_rows() + e.dropped(), r.frame.n_rows);

        // Column count and indicator invariants.
        std::size_t width = (spec.intercept ? 1 : 0) + 1 + 1 + 4 + 4;
        EXPECT_EQ(e.matrix.n_cols(), width);
        std::size_t day0 = (spec.intercept ? 1 : 0) + 1;
        for (std::size_t i = 0; i < e.matrix.n_rows(); ++i) {
            double ones = 0;
            for (std::size_t k = 0; k < 4; ++k) ones += e.matrix(i, day0 + k);
            EXPECT_LE(ones, 1.0);
        }
    }
}

TEST(Expand, NoInterceptAndIntegerFactorLabels) {
    auto r = frame_from("r,i", {"y", "m"}, "1,12\n2,1\n");
    TermSpec spec{"y", {FactorTerm{"m", int_levels(1, 12)}}, false};
    auto e = expand(r.frame, spec);
    EXPECT_EQ(e.matrix.n_cols(), 12u);
    EXPECT_EQ(e.matrix(0, 11), 1.0);
    EXPECT_EQ(e.matrix(1, 0), 2.0);
    for (std::size_t k = 1; k < 12; ++k) EXPECT_EQ(e.matrix(1, k), 0.0);
}

}  // namespace
}  // namespace iochunk
