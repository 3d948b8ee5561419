#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace iochunk {
namespace {

using testing::TempDir;
using testing::read_file;

Frame one_column(ColumnType t, std::string name = "x") {
    Schema s;
    s.types = {t};
    s.names = {std::move(name)};
    return empty_frame(s);
}

TEST(FormatFrame, NullsAndHeader) {
    Frame f = one_column(ColumnType::Integer);
    f.columns[0].push(std::int64_t{1});
    f.columns[0].push_null();
    f.n_rows = 2;
    EXPECT_EQ(format_frame(f, {',', true, std::nullopt}), "x\n1\nNA\n");
    EXPECT_EQ(format_frame(f), "1\nNA\n");
}

TEST(FormatFrame, CollisionForcesQuoting) {
    Frame f = one_column(ColumnType::Character);
    f.columns[0].push(std::string("a,b"));
    f.n_rows = 1;
    EXPECT_EQ(format_frame(f, {',', false, '"'}), "\"a,b\"\n");
    try {
        format_frame(f);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SeparatorCollision);
    }
}

TEST(FormatFrame, NewlineAlwaysCollides) {
    Frame f = one_column(ColumnType::Character);
    f.columns[0].push(std::string("a\nb"));
    f.n_rows = 1;
    EXPECT_THROW(format_frame(f, {',', false, '"'}), Error);
}

TEST(FormatFrame, EmbeddedQuotesAreDoubled) {
    Frame f = one_column(ColumnType::Character);
    f.columns[0].push(std::string("say \"hi\""));
    f.n_rows = 1;
    EXPECT_EQ(format_frame(f, {',', false, '"'}), "\"say \"\"hi\"\"\"\n");
}

TEST(FormatFrame, TypedRendering) {
    Schema s;
    s.types = parse_type_letters("l,r,b,x,t");
    Frame f = empty_frame(s);
    f.columns[0].push(true);
    f.columns[1].push(0.1);
    f.columns[2].push(std::string("\x01\xab", 2));
    f.columns[3].push(std::complex<double>(1.5, -2));
    f.columns[4].push(1199359800.0);
    f.n_rows = 1;
    EXPECT_EQ(format_frame(f), "TRUE,0.1,01ab,1.5-2i,2008-01-03 11:30:00\n");
}

TEST(FormatFrame, RandomRoundTripAllTypes) {
    std::mt19937_64 rng(21);
    for (bool quoted : {false, true}) {
        Schema s;
        s.types = parse_type_letters("l,i,r,c,b,x,t,c");
        if (quoted) s.quote = '"';
        Frame f = testing::random_frame(rng, s, 2000, 0.2);
        WriteOptions w;
        w.quote = s.quote;
        auto back = parse_frame(format_frame(f, w), s);
        EXPECT_TRUE(back.frame == f) << "quoted=" << quoted;
        EXPECT_EQ(back.stats.total_failures(), 0u);
    }
}

TEST(FormatFrame, HeaderRoundTrip) {
    std::mt19937_64 rng(22);
    Schema s;
    s.types = parse_type_letters("i,r");
    s.names = {"alpha", "beta"};
    Frame f = testing::random_frame(rng, s, 50);
    auto back = parse_frame_with_header(format_frame(f, {',', true, std::nullopt}), s);
    EXPECT_TRUE(back.frame == f);
}

TEST(FormatMatrix, Basic) {
    DenseMatrix<double> m(2, 2, std::vector<double>{1, 2, 3, 4});
    EXPECT_EQ(format_matrix(m), "1,2\n3,4\n");
    EXPECT_EQ(format_matrix(DenseMatrix<double>()), "");
    EXPECT_EQ(format_matrix(m, '\t'), "1\t2\n3\t4\n");
}

TEST(FormatMatrix, NaTokensPerType) {
    DenseMatrix<std::int64_t> i(1, 2, std::vector<std::int64_t>{5, MatrixElement<ColumnType::Integer>::na()});
    EXPECT_EQ(format_matrix(i), "5,NA\n");
    DenseMatrix<std::int8_t> l(1, 2, std::vector<std::int8_t>{1, MatrixElement<ColumnType::Logical>::na()});
    EXPECT_EQ(format_matrix(l), "TRUE,NA\n");
    DenseMatrix<double> r(1, 1, std::vector<double>{std::numeric_limits<double>::quiet_NaN()});
    EXPECT_EQ(format_matrix(r), "NaN\n");
}

TEST(Checkpoint, AppendsConcatenate) {
    TempDir dir;
    auto path = dir / "ckpt";
    {
        FileSink sink(path, true);
        append_to_checkpoint(sink, "1\n");
        append_to_checkpoint(sink, "2\n");
        EXPECT_EQ(sink.bytes_written(), 4u);
    }
    EXPECT_EQ(read_file(path), "1\n2\n");
    {
        FileSink again(path);  // append mode keeps earlier content
        append_to_checkpoint(again, "3\n");
    }
    EXPECT_EQ(read_file(path), "1\n2\n3\n");
}

TEST(Checkpoint, YearlyBlocksSumToTotalRows) {
    TempDir dir;
    auto path = dir / "ckpt";
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::size_t> rows(0, 300);
    std::size_t total = 0;
    {
        FileSink sink(path, true);
        for (int year = 0; year < 21; ++year) {
            auto m = testing::random_matrix(rng, rows(rng), 4);
            total += m.n_rows();
            append_to_checkpoint(sink, format_matrix(m));
        }
    }
    auto back = parse_matrix<ColumnType::Real>(read_file(path)).matrix;
    EXPECT_EQ(back.n_rows(), total);
}

TEST(Checkpoint, WriteFailureOnBadPath) {
    try {
        FileSink sink("/nonexistent-dir/ckpt", true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WriteFailure);
    }
}

TEST(Checkpoint, NamesSidecar) {
    TempDir dir;
    auto ckpt = dir / "mm.csv";
    EXPECT_EQ(names_sidecar(ckpt).filename(), "mm.csv.names");
    std::vector<std::string> names{"(Intercept)", "ArrDelay", "DayOfWeek2"};
    write_names(names_sidecar(ckpt), names);
    EXPECT_EQ(read_file(names_sidecar(ckpt)), "(Intercept)\nArrDelay\nDayOfWeek2\n");
    EXPECT_EQ(read_names(names_sidecar(ckpt)), names);
}

}  // namespace
}  // namespace iochunk
