#include "gridflow/core/serialize.hpp"

namespace gridflow::core {

namespace {

std::string bits_to_string(const std::vector<uint8_t>& bits) {
  std::string out(bits.size(), '0');
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i] = '1';
  }
  return out;
}

std::vector<uint8_t> string_to_bits(const std::string& text) {
  std::vector<uint8_t> bits(text.size(), 0);
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      bits[i] = 1;
    } else if (text[i] != '0') {
      throw Error("bad bit string");
    }
  }
  return bits;
}

std::string digits_to_string(const std::array<uint8_t, 81>& digits) {
  std::string out(81, '0');
  for (size_t i = 0; i < 81; ++i) out[i] = static_cast<char>('0' + digits[i]);
  return out;
}

std::array<uint8_t, 81> string_to_digits(const std::string& text) {
  if (text.size() != 81) throw Error("sudoku grid string must have 81 digits");
  std::array<uint8_t, 81> digits{};
  for (size_t i = 0; i < 81; ++i) {
    if (text[i] < '0' || text[i] > '9') throw Error("bad sudoku digit");
    digits[i] = static_cast<uint8_t>(text[i] - '0');
  }
  return digits;
}

}  // namespace

Json payload_to_json(const TaskPayload& payload) {
  Json j;
  if (const auto* vsp = std::get_if<VspPayload>(&payload)) {
    j["size"] = vsp->size;
    std::string holes(vsp->holes.size(), '.');
    for (size_t i = 0; i < vsp->holes.size(); ++i) {
      if (vsp->holes[i]) holes[i] = 'H';
    }
    j["holes"] = holes;
    j["start"] = {vsp->start.r, vsp->start.c};
    j["goal"] = {vsp->goal.r, vsp->goal.c};
  } else if (const auto* maze = std::get_if<MazePayload>(&payload)) {
    j["size"] = maze->size;
    j["open_right"] = bits_to_string(maze->open_right);
    j["open_down"] = bits_to_string(maze->open_down);
    j["start"] = {maze->start.r, maze->start.c};
    j["goal"] = {maze->goal.r, maze->goal.c};
  } else if (const auto* tsp = std::get_if<TspPayload>(&payload)) {
    Json cities = Json::array();
    for (const Point2& city : tsp->cities) cities.push_back({city.x, city.y});
    j["cities"] = std::move(cities);
    j["start"] = tsp->start;
  } else if (const auto* sudoku = std::get_if<SudokuPayload>(&payload)) {
    j["givens"] = digits_to_string(sudoku->givens);
  } else if (const auto* jig = std::get_if<JigsawPayload>(&payload)) {
    j["rows"] = jig->rows;
    j["cols"] = jig->cols;
    j["arrangement"] = jig->arrangement;
    j["texture_seed"] = jig->texture_seed;
  } else {
    throw Error("unknown payload alternative");
  }
  return j;
}

TaskPayload payload_from_json(TaskKind kind, const Json& j) {
  switch (kind) {
    case TaskKind::VspFrozenLake: {
      VspPayload p;
      p.size = j.at("size").get<int>();
      const std::string holes = j.at("holes").get<std::string>();
      p.holes.assign(holes.size(), 0);
      for (size_t i = 0; i < holes.size(); ++i) {
        if (holes[i] == 'H') p.holes[i] = 1;
      }
      p.start = {j.at("start")[0].get<int>(), j.at("start")[1].get<int>()};
      p.goal = {j.at("goal")[0].get<int>(), j.at("goal")[1].get<int>()};
      return p;
    }
    case TaskKind::Maze: {
      MazePayload p;
      p.size = j.at("size").get<int>();
      p.open_right = string_to_bits(j.at("open_right").get<std::string>());
      p.open_down = string_to_bits(j.at("open_down").get<std::string>());
      p.start = {j.at("start")[0].get<int>(), j.at("start")[1].get<int>()};
      p.goal = {j.at("goal")[0].get<int>(), j.at("goal")[1].get<int>()};
      return p;
    }
    case TaskKind::Tsp: {
      TspPayload p;
      for (const auto& city : j.at("cities")) {
        p.cities.push_back({city[0].get<double>(), city[1].get<double>()});
      }
      p.start = j.at("start").get<int>();
      return p;
    }
    case TaskKind::Sudoku: {
      SudokuPayload p;
      p.givens = string_to_digits(j.at("givens").get<std::string>());
      return p;
    }
    case TaskKind::Jigsaw: {
      JigsawPayload p;
      p.rows = j.at("rows").get<int>();
      p.cols = j.at("cols").get<int>();
      p.arrangement = j.at("arrangement").get<std::vector<int>>();
      p.texture_seed = j.at("texture_seed").get<uint64_t>();
      return p;
    }
  }
  throw Error("unknown task kind in payload_from_json");
}

Json solution_to_json(const SymbolicSolution& solution) {
  if (const auto* seq = std::get_if<ActionSequence>(&solution)) {
    return Json(seq->to_letters());
  }
  if (const auto* tour = std::get_if<Tour>(&solution)) {
    return Json(tour->order);
  }
  if (const auto* grid = std::get_if<SudokuGrid>(&solution)) {
    return Json(digits_to_string(grid->cells));
  }
  if (const auto* perm = std::get_if<Permutation>(&solution)) {
    return Json(perm->slot_to_patch);
  }
  throw Error("unknown solution alternative");
}

SymbolicSolution solution_from_json(TaskKind kind, const Json& j) {
  switch (kind) {
    case TaskKind::VspFrozenLake:
    case TaskKind::Maze:
      return ActionSequence::from_letters(j.get<std::string>());
    case TaskKind::Tsp: {
      Tour tour;
      tour.order = j.get<std::vector<int>>();
      return tour;
    }
    case TaskKind::Sudoku: {
      SudokuGrid grid;
      grid.cells = string_to_digits(j.get<std::string>());
      return grid;
    }
    case TaskKind::Jigsaw: {
      Permutation perm;
      perm.slot_to_patch = j.get<std::vector<int>>();
      return perm;
    }
  }
  throw Error("unknown task kind in solution_from_json");
}

Json instance_to_json(const TaskInstance& instance) {
  Json j;
  j["id"] = instance.id;
  j["kind"] = std::string(to_string(instance.kind));
  j["level"] = to_string(instance.level);
  j["seed"] = instance.seed;
  j["payload"] = payload_to_json(instance.payload);
  return j;
}

TaskInstance instance_from_json(const Json& j) {
  TaskInstance instance;
  instance.id = j.at("id").get<std::string>();
  instance.kind = task_kind_from_string(j.at("kind").get<std::string>());
  instance.level = level_from_string(j.at("level").get<std::string>());
  instance.seed = j.at("seed").get<uint64_t>();
  instance.payload = payload_from_json(instance.kind, j.at("payload"));
  return instance;
}

uint64_t payload_hash(const TaskPayload& payload) {
  const std::string bytes = payload_to_json(payload).dump();
  uint64_t h = 0xCBF29CE484222325ull;
  for (const char ch : bytes) {
    h ^= static_cast<uint8_t>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace gridflow::core
