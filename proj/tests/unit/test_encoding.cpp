#include "doctest.h"
#include "support.hpp"
#include "tabtax/encoding.hpp"
#include "tabtax/error.hpp"

using namespace tabtax;

TEST_CASE("z-score and one-hot encoding") {
    const Table t = load_table("id,x,c\n1,1,a\n2,2,b\n3,3,a\n4,NA,b\n", TableFormat::csv);
    const auto m = encode_for_clustering(t, all_rows(t.row_count()));
    REQUIRE(m.dims == 4);  // id, x, c=a, c=b
    CHECK(m.size() == 3);
    CHECK(m.omitted == RowSet{3});
    // x over rows 0..2: mean 2, population std sqrt(2/3)
    const double sd = std::sqrt(2.0 / 3.0);
    CHECK(m.row(0)[1] == doctest::Approx(-1.0 / sd));
    CHECK(m.row(1)[1] == doctest::Approx(0.0));
    CHECK(m.features[2].category == "a");
    CHECK(m.row(0)[2] == 1.0);
    CHECK(m.row(1)[3] == 1.0);
}

TEST_CASE("identifier and excluded columns are skipped") {
    const auto t = test_support::iris();
    const auto m = encode_for_clustering(*t, all_rows(t->row_count()), {"Species"});
    CHECK(m.dims == 4);
    for (const auto& f : m.features) CHECK(t->column(f.column).name != "ID");
    CHECK_THROWS_AS(encode_for_clustering(*t, all_rows(10), {"nope"}), NotFound);
}

TEST_CASE("constant columns keep scale 1") {
    const Table t = load_table("x,y\n5,1\n5,2\n", TableFormat::csv);
    const auto m = encode_for_clustering(t, all_rows(2));
    CHECK(m.features[0].scale == 1.0);
    CHECK(m.row(0)[0] == 0.0);
}

TEST_CASE("nothing to encode") {
    const Table t = load_table("x\nNA\nNA\n", TableFormat::csv);
    CHECK_THROWS_AS(encode_for_clustering(t, all_rows(2)), InvalidArgument);
}
