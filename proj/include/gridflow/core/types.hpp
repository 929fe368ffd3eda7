#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gridflow::core {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidLevelError : public Error {
 public:
  using Error::Error;
};

class GenerationStuckError : public Error {
 public:
  using Error::Error;
};

class KindMismatchError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  explicit ManifestError(const std::string& msg, int line = 0) : Error(msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

class RenderRefusedError : public Error {
 public:
  using Error::Error;
};

class PngError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class SampleDivergedError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Task taxonomy

enum class TaskKind : uint8_t {
  VspFrozenLake,
  Maze,
  Tsp,
  Sudoku,
  Jigsaw,
};

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

// Difficulty is a single integer for all kinds except Jigsaw, which is a
// rows x cols patch layout (cols == 0 means "not a layout").
struct DifficultyLevel {
  int value = 0;
  int cols = 0;

  bool is_layout() const { return cols > 0; }
  int rows() const { return value; }

  bool operator==(const DifficultyLevel& other) const = default;
};

DifficultyLevel level_from_string(std::string_view text);
std::string to_string(const DifficultyLevel& level);

// Admissible difficulty sets, matching the dataset tables this lab targets.
bool level_admissible(TaskKind kind, const DifficultyLevel& level);
std::vector<DifficultyLevel> admissible_levels(TaskKind kind);

// ---------------------------------------------------------------------------
// Payloads

struct Cell {
  int r = 0;
  int c = 0;
  bool operator==(const Cell&) const = default;
};

struct VspPayload {
  int size = 0;
  std::vector<uint8_t> holes;  // size*size, row-major, 1 = hole
  Cell start;
  Cell goal;

  bool hole(int r, int c) const { return holes[static_cast<size_t>(r) * size + c] != 0; }
  bool operator==(const VspPayload&) const = default;
};

// Perfect maze stored as carved passages between adjacent cells.
struct MazePayload {
  int size = 0;
  std::vector<uint8_t> open_right;  // size*size, passage (r,c)->(r,c+1); last col unused
  std::vector<uint8_t> open_down;   // size*size, passage (r,c)->(r+1,c); last row unused
  Cell start;
  Cell goal;

  bool can_go_right(int r, int c) const {
    return c + 1 < size && open_right[static_cast<size_t>(r) * size + c] != 0;
  }
  bool can_go_down(int r, int c) const {
    return r + 1 < size && open_down[static_cast<size_t>(r) * size + c] != 0;
  }
  bool operator==(const MazePayload&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct TspPayload {
  std::vector<Point2> cities;  // in [0,1]^2
  int start = 0;
  bool operator==(const TspPayload&) const = default;
};

struct SudokuPayload {
  std::array<uint8_t, 81> givens{};  // 0 = blank
  int clue_count() const;
  bool operator==(const SudokuPayload&) const = default;
};

struct JigsawPayload {
  int rows = 0;
  int cols = 0;
  // arrangement[i] = source-texture patch shown at input slot i (row-major).
  std::vector<int> arrangement;
  uint64_t texture_seed = 0;

  int patch_count() const { return rows * cols; }
  bool operator==(const JigsawPayload&) const = default;
};

using TaskPayload = std::variant<VspPayload, MazePayload, TspPayload, SudokuPayload, JigsawPayload>;

struct TaskInstance {
  std::string id;
  TaskKind kind = TaskKind::VspFrozenLake;
  DifficultyLevel level;
  uint64_t seed = 0;
  TaskPayload payload;

  const VspPayload& vsp() const { return std::get<VspPayload>(payload); }
  const MazePayload& maze() const { return std::get<MazePayload>(payload); }
  const TspPayload& tsp() const { return std::get<TspPayload>(payload); }
  const SudokuPayload& sudoku() const { return std::get<SudokuPayload>(payload); }
  const JigsawPayload& jigsaw() const { return std::get<JigsawPayload>(payload); }
};

// ---------------------------------------------------------------------------
// Solutions

enum class Move : uint8_t { Up, Down, Left, Right };

char to_char(Move move);
Move move_from_char(char ch);
Cell step(Cell cell, Move move);

struct ActionSequence {
  std::vector<Move> moves;
  std::string to_letters() const;
  static ActionSequence from_letters(std::string_view letters);
  bool operator==(const ActionSequence&) const = default;
};

struct Tour {
  std::vector<int> order;  // city indices, starts at the instance's start city
  bool operator==(const Tour&) const = default;
};

struct SudokuGrid {
  std::array<uint8_t, 81> cells{};  // digits 1..9
  bool operator==(const SudokuGrid&) const = default;
};

struct Permutation {
  std::vector<int> slot_to_patch;  // for each board slot, the input patch placed there
  bool operator==(const Permutation&) const = default;
};

using SymbolicSolution = std::variant<ActionSequence, Tour, SudokuGrid, Permutation>;

bool solution_matches_kind(TaskKind kind, const SymbolicSolution& solution);

// ---------------------------------------------------------------------------
// Images

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // RGB8 row-major, 3 * width * height bytes

  static RasterImage filled(int width, int height, Rgb color);

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  Rgb get(int x, int y) const {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb color) {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    pixels[i] = color.r;
    pixels[i + 1] = color.g;
    pixels[i + 2] = color.b;
  }

  bool operator==(const RasterImage&) const = default;
};

// Squared Euclidean RGB distance, the color-class test everything shares.
inline int color_dist2(Rgb a, Rgb b) {
  const int dr = int(a.r) - int(b.r);
  const int dg = int(a.g) - int(b.g);
  const int db = int(a.b) - int(b.b);
  return dr * dr + dg * dg + db * db;
}

}  // namespace gridflow::core
