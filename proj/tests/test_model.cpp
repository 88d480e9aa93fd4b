#include <doctest.h>

#include <sstream>

#include "ratedev/csv.hpp"
#include "ratedev/model.hpp"

using namespace ratedev;

namespace {

Review rv(std::string r, std::string p, double rating) { return {std::move(r), std::move(p), rating, {}, {}}; }

Dataset star(const std::string& hub, int leaves, const std::string& prefix) {
  std::vector<Review> out;
  for (int i = 0; i < leaves; ++i) out.push_back(rv(prefix + std::to_string(i), hub, 5));
  return Dataset(out);
}

std::vector<Review> concat(const Dataset& a, const Dataset& b) {
  std::vector<Review> out(a.reviews().begin(), a.reviews().end());
  out.insert(out.end(), b.reviews().begin(), b.reviews().end());
  return out;
}

ParseResult parse(const std::string& text, ParseOptions opt = {}) {
  std::istringstream in(text);
  return parse_reviews(in, opt);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("indexes follow first appearance") {
    Dataset d({rv("b", "x", 5), rv("a", "y", 1), rv("b", "y", 4)});
    d.validate();
    CHECK(d.reviewer_count() == 2);
    CHECK(d.product_count() == 2);
    CHECK(d.reviewer_id(0) == "b");
    CHECK(d.product_id(1) == "y");
    CHECK(d.reviews_of_reviewer(0).size() == 2);
    CHECK(d.reviews_of_product(1).size() == 2);
    CHECK(d.reviews_of_product(1)[0] == 1);
    CHECK(d.find_reviewer("a") == std::optional<std::size_t>(1));
    CHECK_FALSE(d.find_product("z"));
  }

  TEST_CASE("construction checks") {
    CHECK_THROWS_AS(Dataset({rv("a", "x", 6)}), DatasetError);
    CHECK_THROWS_AS(Dataset({rv("", "x", 3)}), DatasetError);
    CHECK_THROWS_AS(Dataset({rv("a", "x", 3)}, kFiveStar, 5.5), DatasetError);
    CHECK_NOTHROW(Dataset({rv("a", "x", 1)}, kBinary, 0.5));
  }

  TEST_CASE("duplicate pairs are kept") {
    Dataset d({rv("a", "x", 5), rv("a", "x", 1)});
    CHECK(d.review_count() == 2);
    CHECK(d.reviews_of_product(0).size() == 2);
  }

  TEST_CASE("copies keep working lookups") {
    Dataset d({rv("a", "x", 5)});
    Dataset copy = d;
    d = Dataset({rv("zz", "q", 2)});
    CHECK(copy.find_reviewer("a") == std::optional<std::size_t>(0));
    CHECK(copy.find_product("x") == std::optional<std::size_t>(0));
  }

  TEST_CASE("largest component") {
    Dataset big = star("p1", 5, "r");
    Dataset small = star("q1", 2, "s");
    CHECK(largest_connected_component(Dataset(concat(small, big))).review_count() == 5);

    CHECK(largest_connected_component(big).reviews().size() == big.reviews().size());

    // equal sizes: the component holding the smallest id wins
    Dataset tie_a({rv("m", "x", 5)}), tie_b({rv("b", "y", 5)});
    auto lcc = largest_connected_component(Dataset(concat(tie_a, tie_b)));
    REQUIRE(lcc.reviewer_count() == 1);
    CHECK(lcc.reviewer_id(0) == "b");

    CHECK_THROWS_WITH_AS(largest_connected_component(Dataset()), "empty dataset", DatasetError);
  }

  TEST_CASE("degree filters") {
    FilterPolicy policy;
    // reviewer with 2 reviews is below the minimum of 3
    Dataset two({rv("a", "x", 5), rv("a", "y", 5), rv("b", "x", 5), rv("b", "y", 5), rv("b", "z", 5),
                 rv("c", "x", 5), rv("c", "y", 5), rv("c", "z", 5)});
    auto f = filter_dataset(two, policy);
    CHECK_FALSE(f.find_reviewer("a"));
    CHECK(f.find_reviewer("b"));

    // product with one review goes, and so does a reviewer left with nothing
    policy.min_reviews_per_reviewer = 1;
    Dataset lone({rv("a", "x", 5), rv("b", "y", 5), rv("c", "y", 5)});
    auto g = filter_dataset(lone, policy);
    CHECK_FALSE(g.find_product("x"));
    CHECK_FALSE(g.find_reviewer("a"));
    CHECK(g.review_count() == 2);

    // all within bounds: identity
    auto h = filter_dataset(g, policy);
    CHECK(std::equal(h.reviews().begin(), h.reviews().end(), g.reviews().begin(), g.reviews().end()));
  }

  TEST_CASE("fixpoint filtering") {
    FilterPolicy policy;
    policy.min_reviews_per_reviewer = 2;
    policy.min_reviews_per_product = 2;
    // dropping product z leaves b with one review, which drops b, then y
    Dataset d({rv("a", "x", 5), rv("a", "y", 5), rv("b", "y", 5), rv("b", "z", 5), rv("c", "x", 5),
               rv("c", "w", 5), rv("d", "x", 5), rv("d", "w", 5)});
    auto once = filter_dataset(d, policy);
    policy.fixpoint = true;
    auto stable = filter_dataset(d, policy);
    CHECK(stable.review_count() <= once.review_count());
    CHECK(filter_dataset(stable, policy).review_count() == stable.review_count());
    for (std::size_t r = 0; r < stable.reviewer_count(); ++r) CHECK(stable.reviews_of_reviewer(r).size() >= 2);
    for (std::size_t p = 0; p < stable.product_count(); ++p) CHECK(stable.reviews_of_product(p).size() >= 2);
  }

  TEST_CASE("iso days") {
    CHECK(parse_iso_day("1970-01-01") == std::optional<Day>(0));
    CHECK(parse_iso_day("2004-07-01T12:00:00") == parse_iso_day("2004-07-01"));
    CHECK_FALSE(parse_iso_day("2004-02-30"));
    CHECK_FALSE(parse_iso_day("yesterday"));
    CHECK(format_iso_day(*parse_iso_day("2004-07-01")) == "2004-07-01");
  }
}

TEST_SUITE("csv") {
  TEST_CASE("field mapping") {
    auto r = parse("reviewer_id,product_id,rating,date,text\nr1,p1,5,2004-07-01,\"great\"\n");
    REQUIRE(r.dataset.review_count() == 1);
    const Review& got = r.dataset.review(0);
    CHECK(got == Review{"r1", "p1", 5.0, parse_iso_day("2004-07-01"), "great"});
  }

  TEST_CASE("missing rating drops the record") {
    auto r = parse("reviewer_id,product_id,rating\nr1,p1,5\nr2,p1,\nr3,p2,4\n");
    CHECK(r.dataset.review_count() == 2);
    CHECK(r.dropped == 1);
  }

  TEST_CASE("empty source") {
    auto r = parse("");
    CHECK(r.dataset.empty());
    CHECK(r.dropped == 0);
  }

  TEST_CASE("columns located by header") {
    auto r = parse("rating,product_id,extra,reviewer_id\n4,p,zz,r\n");
    REQUIRE(r.dataset.review_count() == 1);
    CHECK(r.dataset.review(0).reviewer_id == "r");
    CHECK(r.dataset.review(0).rating == 4.0);
  }

  TEST_CASE("quoted fields") {
    auto r = parse("reviewer_id,product_id,rating,text\n\"a,b\",p,3,\"line one\nline \"\"two\"\"\"\n");
    REQUIRE(r.dataset.review_count() == 1);
    CHECK(r.dataset.review(0).reviewer_id == "a,b");
    CHECK(*r.dataset.review(0).text == "line one\nline \"two\"");
  }

  TEST_CASE("strict and lenient handling") {
    const std::string bad = "reviewer_id,product_id,rating\nr1,p1,5\nr2,p1,abc\nr3,p1,9\n";
    auto lenient = parse(bad);
    CHECK(lenient.dataset.review_count() == 1);
    CHECK(lenient.malformed == 1);
    CHECK(lenient.dropped == 1);

    ParseOptions strict;
    strict.strict = true;
    try {
      parse(bad, strict);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("reviewer_id,product_id,rating\nr1,p1,9\n", strict), ParseError);
    CHECK_THROWS_AS(parse("reviewer_id,product_id\nr1,p1\n", strict), ParseError);
  }

  TEST_CASE("jsonl input") {
    ParseOptions opt;
    opt.format = InputFormat::jsonl;
    auto r = parse("{\"reviewer_id\":\"a\",\"product_id\":\"x\",\"rating\":4,\"date\":\"2010-01-02\"}\n\n"
                   "{\"reviewer_id\":\"b\",\"product_id\":\"x\",\"rating\":1,\"text\":\"meh\"}\n",
                   opt);
    REQUIRE(r.dataset.review_count() == 2);
    CHECK(r.dataset.review(0).date == parse_iso_day("2010-01-02"));
    CHECK(*r.dataset.review(1).text == "meh");
  }

  TEST_CASE("unreadable file") {
    CHECK_THROWS_AS(parse_reviews_file("/nonexistent/reviews.csv"), IoError);
  }

  TEST_CASE("round trip") {
    Dataset d({Review{"r,1", "p\"1", 4.5, parse_iso_day("1999-12-31"), "two\nlines"},
               Review{"r2", "p1", 1, {}, {}}, Review{"r2", "p2", 3, {}, "x"}});
    std::ostringstream out;
    write_reviews_csv(out, d);
    auto back = parse(out.str());
    CHECK(back.dropped == 0);
    CHECK(std::equal(back.dataset.reviews().begin(), back.dataset.reviews().end(), d.reviews().begin(),
                     d.reviews().end()));
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(5.0) == "5");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
