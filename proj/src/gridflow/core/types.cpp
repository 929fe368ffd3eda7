#include "gridflow/core/types.hpp"

#include <algorithm>
#include <charconv>

namespace gridflow::core {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::VspFrozenLake: return "vsp";
    case TaskKind::Maze: return "maze";
    case TaskKind::Tsp: return "tsp";
    case TaskKind::Sudoku: return "sudoku";
    case TaskKind::Jigsaw: return "jigsaw";
  }
  throw Error("unknown TaskKind");
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "vsp") return TaskKind::VspFrozenLake;
  if (name == "maze") return TaskKind::Maze;
  if (name == "tsp") return TaskKind::Tsp;
  if (name == "sudoku") return TaskKind::Sudoku;
  if (name == "jigsaw") return TaskKind::Jigsaw;
  throw Error("unknown task kind: " + std::string(name));
}

DifficultyLevel level_from_string(std::string_view text) {
  DifficultyLevel level;
  const size_t x = text.find('x');
  const auto parse_int = [](std::string_view s) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error("bad difficulty level: " + std::string(s));
    }
    return value;
  };
  if (x == std::string_view::npos) {
    level.value = parse_int(text);
  } else {
    level.value = parse_int(text.substr(0, x));
    level.cols = parse_int(text.substr(x + 1));
  }
  return level;
}

std::string to_string(const DifficultyLevel& level) {
  if (level.is_layout()) {
    return std::to_string(level.value) + "x" + std::to_string(level.cols);
  }
  return std::to_string(level.value);
}

std::vector<DifficultyLevel> admissible_levels(TaskKind kind) {
  switch (kind) {
    case TaskKind::VspFrozenLake:
      return {{3}, {4}, {5}, {6}, {7}, {8}, {16}, {32}};
    case TaskKind::Maze:
      return {{8}, {16}, {32}};
    case TaskKind::Tsp:
      return {{12}, {13}, {14}, {15}, {16}, {17}, {18}};
    case TaskKind::Sudoku:
      return {{30}, {35}, {40}, {45}};
    case TaskKind::Jigsaw:
      return {{1, 2}, {1, 3}, {2, 1}, {3, 1}, {2, 2}, {3, 3}, {4, 4}};
  }
  return {};
}

bool level_admissible(TaskKind kind, const DifficultyLevel& level) {
  const auto levels = admissible_levels(kind);
  return std::find(levels.begin(), levels.end(), level) != levels.end();
}

int SudokuPayload::clue_count() const {
  return static_cast<int>(std::count_if(givens.begin(), givens.end(), [](uint8_t d) { return d != 0; }));
}

char to_char(Move move) {
  switch (move) {
    case Move::Up: return 'U';
    case Move::Down: return 'D';
    case Move::Left: return 'L';
    case Move::Right: return 'R';
  }
  throw Error("unknown Move");
}

Move move_from_char(char ch) {
  switch (ch) {
    case 'U': return Move::Up;
    case 'D': return Move::Down;
    case 'L': return Move::Left;
    case 'R': return Move::Right;
  }
  throw Error(std::string("unknown move letter: ") + ch);
}

Cell step(Cell cell, Move move) {
  switch (move) {
    case Move::Up: return {cell.r - 1, cell.c};
    case Move::Down: return {cell.r + 1, cell.c};
    case Move::Left: return {cell.r, cell.c - 1};
    case Move::Right: return {cell.r, cell.c + 1};
  }
  throw Error("unknown Move");
}

std::string ActionSequence::to_letters() const {
  std::string out;
  out.reserve(moves.size());
  for (const Move move : moves) out.push_back(to_char(move));
  return out;
}

ActionSequence ActionSequence::from_letters(std::string_view letters) {
  ActionSequence seq;
  seq.moves.reserve(letters.size());
  for (const char ch : letters) seq.moves.push_back(move_from_char(ch));
  return seq;
}

bool solution_matches_kind(TaskKind kind, const SymbolicSolution& solution) {
  switch (kind) {
    case TaskKind::VspFrozenLake:
    case TaskKind::Maze:
      return std::holds_alternative<ActionSequence>(solution);
    case TaskKind::Tsp:
      return std::holds_alternative<Tour>(solution);
    case TaskKind::Sudoku:
      return std::holds_alternative<SudokuGrid>(solution);
    case TaskKind::Jigsaw:
      return std::holds_alternative<Permutation>(solution);
  }
  return false;
}

RasterImage RasterImage::filled(int width, int height, Rgb color) {
  RasterImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<size_t>(width) * height * 3);
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = color.r;
    img.pixels[i + 1] = color.g;
    img.pixels[i + 2] = color.b;
  }
  return img;
}

}  // namespace gridflow::core
