#include <doctest.h>

#include "levyflow/blob.hpp"
#include "levyflow/core.hpp"

#include <cstring>

using namespace levyflow;

TEST_CASE("blob golden bytes") {
    Blob b;
    b.meta = {{"a", 1}};
    b.add("x", {1.0});
    const std::string bytes = encode_blob(b);
    const std::string header = R"({"columns":[{"count":1,"name":"x"}],"meta":{"a":1}})";
    std::string expected = "LVFB";
    expected += std::string("\x01\x00\x00\x00", 4);
    expected += static_cast<char>(header.size());
    expected += std::string(7, '\0');
    expected += header;
    expected += std::string("\x00\x00\x00\x00\x00\x00\xf0\x3f", 8);
    CHECK(bytes == expected);
    const Blob back = decode_blob(bytes);
    CHECK(back.meta == b.meta);
    CHECK(back.column("x") == std::vector<double>{1.0});
    CHECK_THROWS_AS(decode_blob("nope"), DomainError);
    CHECK_THROWS_AS(back.column("y"), DomainError);
}
