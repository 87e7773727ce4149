#include <gtest/gtest.h>

#include <filesystem>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"
#include "support.hpp"

namespace scenesense {
namespace {

namespace fs = std::filesystem;

TEST(Io, AtomicWriteReplacesAndLeavesNoTemporaries) {
  testing::TempDir dir;
  const auto path = dir / "a.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_text_file(path), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Io, WriteCreatesParentDirectories) {
  testing::TempDir dir;
  write_file_atomic(dir / "x/y/z.txt", "ok");
  EXPECT_EQ(read_text_file(dir / "x/y/z.txt"), "ok");
}

TEST(Io, WriteUnderAFileIsIoError) {
  testing::TempDir dir;
  write_file_atomic(dir / "f", "plain");
  try {
    write_file_atomic(dir / "f/inner.txt", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Io, MissingInputIsConfigError) {
  try {
    read_text_file("/nonexistent/scenesense/file.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("input not found"), std::string::npos);
  }
}

TEST(Io, JsonParseErrorNamesLineAndColumn) {
  testing::TempDir dir;
  write_file_atomic(dir / "bad.json", "{\n  \"a\": 1,\n  \"b\": ]\n}\n");
  try {
    read_json_file(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Io, JsonlSkipsBlankLines) {
  testing::TempDir dir;
  write_file_atomic(dir / "r.jsonl", "{\"a\":1}\n\n{\"a\":2}\n");
  const auto rows = read_jsonl_file(dir / "r.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].at("a"), 2);
  write_jsonl_file(dir / "w.jsonl", rows);
  EXPECT_EQ(read_text_file(dir / "w.jsonl"), "{\"a\":1}\n{\"a\":2}\n");
}

TEST(Csv, EscapeAndParseRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto text = csv_row(fields) + "\n" + csv_row({"1", "2"}) + "\n";
  const auto parsed = parse_csv(text);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0], fields);
  EXPECT_EQ(parsed[1], (std::vector<std::string>{"1", "2"}));
}

TEST(Format, FixedRoundsHalfAwayFromZero) {
  EXPECT_EQ(format_fixed(0.0625, 3), "0.063");
  EXPECT_EQ(format_fixed(-0.0625, 3), "-0.063");
  EXPECT_EQ(format_fixed(2.5, 0), "3");
  EXPECT_EQ(format_fixed(1.0, 3), "1.000");
  EXPECT_EQ(format_fixed(1e7, 2), "10000000.00");
}

TEST(Format, NoNegativeZero) {
  EXPECT_EQ(format_fixed(-0.0, 3), "0.000");
  EXPECT_EQ(format_fixed(-0.0004, 3), "0.000");
}

TEST(Format, DoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) EXPECT_EQ(std::stod(format_double(v)), v);
}

}  // namespace
}  // namespace scenesense
