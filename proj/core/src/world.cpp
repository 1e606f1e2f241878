#include "orn/world.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "orn/error.hpp"
#include "orn/params.hpp"

namespace orn::world {

namespace {

constexpr std::size_t kMaxAttempts = 200;
constexpr std::size_t kMaxPlacements = 2000;

using Pos = std::array<long, 2>;  // top-left (row, col)

struct Object {
  std::size_t cls = 0;
  std::vector<Pos> pos;        // per frame
  std::vector<bool> visible;   // per frame
  std::vector<bool> flipped;   // per frame
};

struct Scene {
  std::vector<Object> objects;
  Label label;
  std::vector<Event> events;
};

const std::array<Pos, 8> kDirections{{{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

// Chebyshev distance between the top-left corners of two equal boxes. Boxes
// of side s overlap below s and touch at exactly s.
long box_distance(const Pos& a, const Pos& b) { return std::max(std::labs(a[0] - b[0]), std::labs(a[1] - b[1])); }

long uniform(std::mt19937_64& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

Object static_object(std::size_t cls, const Pos& p, std::size_t frames) {
  return {cls, std::vector<Pos>(frames, p), std::vector<bool>(frames, true), std::vector<bool>(frames, false)};
}

// Minimum box distance between `p` (static) and every visible frame of `o`.
long min_distance(const Object& o, const Pos& p) {
  long best = std::numeric_limits<long>::max();
  for (std::size_t f = 0; f < o.pos.size(); ++f) {
    if (o.visible[f]) best = std::min(best, box_distance(o.pos[f], p));
  }
  return best;
}

// A static position at distance >= min_gap + size from all existing objects.
bool place_clear(const WorldConfig& cfg, const std::vector<Object>& objects, long min_gap, std::mt19937_64& rng,
                 Pos& out) {
  const long s = static_cast<long>(cfg.object_size);
  const long hmax = static_cast<long>(cfg.height) - s, wmax = static_cast<long>(cfg.width) - s;
  for (std::size_t i = 0; i < kMaxPlacements; ++i) {
    const Pos p{uniform(rng, 0, hmax), uniform(rng, 0, wmax)};
    bool ok = true;
    for (const auto& o : objects) ok = ok && min_distance(o, p) >= s + min_gap;
    if (ok) {
      out = p;
      return true;
    }
  }
  return false;
}

// Straight path p0 + step * tau for tau in [tau_lo, tau_hi], with p0 drawn so
// every position stays inside the frame. False when no p0 fits.
bool place_path(const WorldConfig& cfg, const Pos& step, long tau_lo, long tau_hi, std::mt19937_64& rng, Pos& p0) {
  const long s = static_cast<long>(cfg.object_size);
  const std::array<long, 2> limit{static_cast<long>(cfg.height) - s, static_cast<long>(cfg.width) - s};
  for (int axis = 0; axis < 2; ++axis) {
    const long a = step[axis] * tau_lo, b = step[axis] * tau_hi;
    const long lo = -std::min(a, b), hi = limit[axis] - std::max(a, b);
    if (lo > hi) return false;
    p0[axis] = uniform(rng, lo, hi);
  }
  return true;
}

Pos random_step(const WorldConfig& cfg, std::mt19937_64& rng) {
  const auto& d = kDirections[static_cast<std::size_t>(uniform(rng, 0, 7))];
  const long v = static_cast<long>(cfg.speed);
  return {d[0] * v, d[1] * v};
}

std::size_t class_index(const WorldConfig& cfg, std::size_t cls) {
  auto it = std::find(cfg.object_classes.begin(), cfg.object_classes.end(), cls);
  if (it == cfg.object_classes.end()) throw GenerationError("event names class " + std::to_string(cls) +
                                                            " outside the configured classes");
  return static_cast<std::size_t>(it - cfg.object_classes.begin());
}

// First frame in which `y` touches or overlaps a box `x` held at an earlier
// frame, or -1.
long trail_contact(const Object& x, const Object& y, long size) {
  for (std::size_t f = 1; f < y.pos.size(); ++f) {
    for (std::size_t e = 0; e < f; ++e) {
      if (box_distance(x.pos[e], y.pos[f]) <= size) return static_cast<long>(f);
    }
  }
  return -1;
}

bool ordered_swap(const WorldConfig& cfg, std::mt19937_64& rng, Scene& scene) {
  const std::size_t a = cfg.object_classes[0], b = cfg.object_classes[1];
  const std::size_t label = static_cast<std::size_t>(uniform(rng, 0, 1));
  const std::size_t leader = label == 0 ? a : b, follower = label == 0 ? b : a;
  const long frames = static_cast<long>(cfg.num_frames), lag = static_cast<long>(cfg.lag);
  const long s = static_cast<long>(cfg.object_size);
  const Pos step = random_step(cfg, rng);
  Pos p0{};
  if (!place_path(cfg, step, -lag, frames - 1, rng, p0)) return false;
  Object lead{leader, {}, std::vector<bool>(cfg.num_frames, true), std::vector<bool>(cfg.num_frames, false)};
  Object follow{follower, {}, lead.visible, lead.flipped};
  for (long f = 0; f < frames; ++f) {
    lead.pos.push_back({p0[0] + step[0] * f, p0[1] + step[1] * f});
    follow.pos.push_back({p0[0] + step[0] * (f - lag), p0[1] + step[1] * (f - lag)});
    if (box_distance(lead.pos.back(), follow.pos.back()) < s) return false;
  }
  // Instance order follows the class roles, never the label.
  scene.objects = {label == 0 ? lead : follow, label == 0 ? follow : lead};
  for (std::size_t i = 0; i < cfg.distractors; ++i) {
    std::size_t cls = cfg.object_classes.size() > 2
                          ? cfg.object_classes[static_cast<std::size_t>(uniform(
                                rng, 2, static_cast<long>(cfg.object_classes.size()) - 1))]
                          : cfg.object_classes[static_cast<std::size_t>(uniform(rng, 0, 1))];
    Pos p{};
    if (!place_clear(cfg, scene.objects, 2, rng, p)) return false;
    scene.objects.push_back(static_object(cls, p, cfg.num_frames));
  }
  scene.label.label = label;
  const long contact = trail_contact(lead, follow, s);
  if (contact >= 0) scene.events.push_back({EventKind::contact, static_cast<std::size_t>(contact), leader, follower});
  if (lag < frames) scene.events.push_back({EventKind::swap, static_cast<std::size_t>(lag), leader, follower});
  else scene.events.push_back({EventKind::swap, static_cast<std::size_t>(frames - 1), leader, follower});
  return true;
}

bool touch(const WorldConfig& cfg, std::mt19937_64& rng, Scene& scene) {
  const long s = static_cast<long>(cfg.object_size), frames = static_cast<long>(cfg.num_frames);
  const std::size_t agent_cls = cfg.object_classes[0];
  const Pos step = random_step(cfg, rng);
  Pos p0{};
  if (!place_path(cfg, step, 0, frames - 1, rng, p0)) return false;
  Object agent{agent_cls, {}, std::vector<bool>(cfg.num_frames, true), std::vector<bool>(cfg.num_frames, false)};
  for (long f = 0; f < frames; ++f) agent.pos.push_back({p0[0] + step[0] * f, p0[1] + step[1] * f});
  scene.objects = {agent};
  scene.label.multi_hot.assign(cfg.object_classes.size(), 0.0f);
  bool any = false;
  for (std::size_t i = 1; i < cfg.object_classes.size(); ++i) {
    if (uniform(rng, 0, 3) == 0) continue;
    any = true;
    const bool touched = uniform(rng, 0, 1) == 1;
    const long hmax = static_cast<long>(cfg.height) - s, wmax = static_cast<long>(cfg.width) - s;
    bool placed = false;
    for (std::size_t k = 0; k < kMaxPlacements && !placed; ++k) {
      const Pos p{uniform(rng, 0, hmax), uniform(rng, 0, wmax)};
      const long d = min_distance(scene.objects[0], p);
      bool ok = touched ? d == s : d >= s + 3;
      for (std::size_t j = 1; j < scene.objects.size() && ok; ++j) ok = min_distance(scene.objects[j], p) >= s + 2;
      if (!ok) continue;
      scene.objects.push_back(static_object(cfg.object_classes[i], p, cfg.num_frames));
      placed = true;
    }
    if (!placed) return false;
    if (touched) scene.label.multi_hot[i] = 1.0f;
  }
  if (!any) return false;
  for (std::size_t j = 1; j < scene.objects.size(); ++j) {
    for (std::size_t f = 0; f < cfg.num_frames; ++f) {
      if (box_distance(agent.pos[f], scene.objects[j].pos[0]) <= s) {
        scene.events.push_back({EventKind::touch, f, agent_cls, scene.objects[j].cls});
        break;
      }
    }
  }
  std::stable_sort(scene.events.begin(), scene.events.end(),
                   [](const Event& x, const Event& y) { return x.frame < y.frame; });
  return true;
}

bool state_change(const WorldConfig& cfg, std::mt19937_64& rng, Scene& scene) {
  const long s = static_cast<long>(cfg.object_size), frames = static_cast<long>(cfg.num_frames);
  const std::size_t n = cfg.object_classes.size();
  const std::size_t target_i = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(n) - 1));
  const long fc = uniform(rng, 1, frames - 2);
  const Pos step = random_step(cfg, rng);
  const Pos unit{step[0] == 0 ? 0 : (step[0] > 0 ? 1 : -1), step[1] == 0 ? 0 : (step[1] > 0 ? 1 : -1)};
  // Agent path for tau in [0, fc] followed by the target box one side further.
  Pos p0{};
  const Pos reach{step[0] * fc + unit[0] * s, step[1] * fc + unit[1] * s};
  const long hmax = static_cast<long>(cfg.height) - s, wmax = static_cast<long>(cfg.width) - s;
  const long lo0 = -std::min(0L, reach[0]), hi0 = hmax - std::max(0L, reach[0]);
  const long lo1 = -std::min(0L, reach[1]), hi1 = wmax - std::max(0L, reach[1]);
  if (lo0 > hi0 || lo1 > hi1) return false;
  p0 = {uniform(rng, lo0, hi0), uniform(rng, lo1, hi1)};
  Object agent{cfg.object_classes[0], {}, std::vector<bool>(cfg.num_frames, true),
               std::vector<bool>(cfg.num_frames, false)};
  for (long f = 0; f < frames; ++f) {
    const long tau = std::min(f, fc);
    agent.pos.push_back({p0[0] + step[0] * tau, p0[1] + step[1] * tau});
  }
  Object target = static_object(cfg.object_classes[target_i], {p0[0] + reach[0], p0[1] + reach[1]}, cfg.num_frames);
  for (long f = fc + 1; f < frames; ++f) target.flipped[static_cast<std::size_t>(f)] = true;
  if (min_distance(agent, target.pos[0]) < s) return false;
  scene.objects = {agent, target};
  if (n > 2) {
    std::size_t other = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(n) - 2));
    if (other >= target_i) ++other;
    Pos p{};
    if (!place_clear(cfg, scene.objects, 3, rng, p)) return false;
    scene.objects.push_back(static_object(cfg.object_classes[other], p, cfg.num_frames));
  }
  scene.label.label = target_i;
  scene.events = {{EventKind::contact, static_cast<std::size_t>(fc), agent.cls, target.cls},
                  {EventKind::flip, static_cast<std::size_t>(fc + 1), target.cls, target.cls}};
  return true;
}

bool appear_disappear(const WorldConfig& cfg, std::mt19937_64& rng, Scene& scene) {
  const std::size_t n = cfg.object_classes.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(uniform(rng, 2, 3)));
  const std::size_t subject = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(count) - 1));
  const bool vanish = uniform(rng, 0, 1) == 1;
  const std::size_t change = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(cfg.num_frames) - 1));
  for (std::size_t i = 0; i < count; ++i) {
    Pos p{};
    if (!place_clear(cfg, scene.objects, 2, rng, p)) return false;
    Object o = static_object(cfg.object_classes[order[i]], p, cfg.num_frames);
    if (i == subject) {
      for (std::size_t f = 0; f < cfg.num_frames; ++f) o.visible[f] = vanish ? f < change : f >= change;
    }
    scene.objects.push_back(std::move(o));
  }
  const std::size_t cls = scene.objects[subject].cls;
  scene.label.label = 2 * order[subject] + (vanish ? 1 : 0);
  scene.events = {{vanish ? EventKind::vanish : EventKind::appear, change, cls, cls}};
  return true;
}

bool render(const WorldConfig& cfg, const Scene& scene, std::mt19937_64& rng, Video& v) {
  const std::size_t h = cfg.height, w = cfg.width, frames = cfg.num_frames, s = cfg.object_size;
  v.frames = frames;
  v.height = h;
  v.width = w;
  v.pixels.assign(3 * frames * h * w, 0);
  std::uniform_int_distribution<int> noise(-20, 20);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < h * w; ++i) {
      const auto value = static_cast<std::uint8_t>(100 + noise(rng));
      for (std::size_t f = 0; f < frames; ++f) v.pixels[(c * frames + f) * h * w + i] = value;
    }
  }
  v.annotations.assign(frames, {});
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<std::uint8_t> owner(h * w, 0);
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
      const auto& o = scene.objects[k];
      if (!o.visible[f]) continue;
      const auto shape = archetype_mask(o.cls, s);
      const auto color = archetype_color(o.cls, o.flipped[f]);
      InstanceAnnotation a;
      a.class_distribution.assign(kArchetypes, 0.0f);
      a.class_distribution[o.cls] = 1.0f;
      a.score = 1.0f;
      a.instance_index = k;
      a.mask = Mask(h, w);
      for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
          if (!shape[r * s + c]) continue;
          const long rr = o.pos[f][0] + static_cast<long>(r), cc = o.pos[f][1] + static_cast<long>(c);
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w)) return false;
          const std::size_t idx = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
          if (owner[idx]) return false;
          owner[idx] = 1;
          a.mask.set(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          for (std::size_t ch = 0; ch < 3; ++ch) v.pixels[(ch * frames + f) * h * w + idx] = color[ch];
        }
      }
      v.annotations[f].push_back(std::move(a));
    }
  }
  return true;
}

// Drops annotations and perturbs mask boundaries; pixels stay untouched.
void add_detector_noise(const WorldConfig& cfg, std::mt19937_64& rng, Video& v) {
  std::bernoulli_distribution drop(cfg.drop_probability), flip(0.25);
  for (auto& frame : v.annotations) {
    if (cfg.jitter_masks) {
      std::vector<std::uint8_t> owner(v.height * v.width, 0);
      for (const auto& a : frame) {
        for (std::size_t i = 0; i < owner.size(); ++i) owner[i] |= a.mask.pixels[i];
      }
      for (auto& a : frame) {
        Mask m = a.mask;
        for (std::size_t r = 0; r < v.height; ++r) {
          for (std::size_t c = 0; c < v.width; ++c) {
            bool edge = false;
            for (int dr = -1; dr <= 1 && !edge; ++dr) {
              for (int dc = -1; dc <= 1 && !edge; ++dc) {
                const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
                if (rr < 0 || cc < 0 || rr >= static_cast<long>(v.height) || cc >= static_cast<long>(v.width)) continue;
                edge = a.mask.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) != a.mask.at(r, c);
              }
            }
            if (!edge || !flip(rng)) continue;
            if (a.mask.at(r, c)) {
              m.set(r, c, false);
            } else if (!owner[r * v.width + c]) {
              m.set(r, c, true);
              owner[r * v.width + c] = 1;
            }
          }
        }
        if (m.count() > 0) a.mask = std::move(m);
      }
    }
    if (cfg.drop_probability > 0.0) {
      std::vector<InstanceAnnotation> kept;
      for (auto& a : frame) {
        if (!drop(rng)) kept.push_back(std::move(a));
      }
      frame = std::move(kept);
    }
  }
}

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::contact: return "contact";
    case EventKind::swap: return "swap";
    case EventKind::touch: return "touch";
    case EventKind::flip: return "flip";
    case EventKind::appear: return "appear";
    case EventKind::vanish: return "vanish";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::contact, EventKind::swap, EventKind::touch, EventKind::flip, EventKind::appear,
                 EventKind::vanish}) {
    if (to_string(k) == s) return k;
  }
  throw FormatError("unknown event kind '" + s + "'");
}

std::vector<std::uint8_t> archetype_mask(std::size_t id, std::size_t size) {
  std::vector<std::uint8_t> m(size * size, 0);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  const double radius = static_cast<double>(size) / 2.0;
  const double arm = std::max(0.5, static_cast<double>(size) / 6.0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t col = 0; col < size; ++col) {
      const double dr = static_cast<double>(r) - c, dc = static_cast<double>(col) - c;
      const double d2 = dr * dr + dc * dc;
      bool on = false;
      switch (id) {
        case 0: on = true; break;
        case 1: on = d2 <= radius * radius; break;
        case 2: on = std::abs(dc) <= (static_cast<double>(r) + 1.0) / 2.0; break;
        case 3: on = r >= size / 3 && r < size - size / 3; break;
        case 4: on = std::abs(dr) <= arm || std::abs(dc) <= arm; break;
        case 5: on = d2 <= radius * radius && d2 >= (radius / 2.0) * (radius / 2.0); break;
        default: throw GenerationError("unknown archetype " + std::to_string(id));
      }
      m[r * size + col] = on ? 1 : 0;
    }
  }
  return m;
}

std::array<std::uint8_t, 3> archetype_color(std::size_t id, bool flipped) {
  static constexpr std::array<std::array<std::uint8_t, 3>, kArchetypes> colors{
      {{230, 60, 60}, {60, 200, 60}, {60, 90, 230}, {230, 200, 40}, {200, 60, 220}, {40, 210, 220}}};
  auto c = colors.at(id);
  if (flipped) {
    for (auto& v : c) v = static_cast<std::uint8_t>(255 - v);
  }
  return c;
}

Video generate_video(const WorldConfig& cfg, std::uint64_t index) {
  cfg.validate();
  std::mt19937_64 rng(mix_seed(cfg.seed, index));
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Scene scene;
    bool ok = false;
    switch (cfg.task) {
      case TaskKind::ordered_swap: ok = ordered_swap(cfg, rng, scene); break;
      case TaskKind::touch: ok = touch(cfg, rng, scene); break;
      case TaskKind::state_change: ok = state_change(cfg, rng, scene); break;
      case TaskKind::appear_disappear: ok = appear_disappear(cfg, rng, scene); break;
    }
    if (!ok) continue;
    Video v;
    v.index = index;
    if (!render(cfg, scene, rng, v)) continue;
    v.label = scene.label;
    v.events = scene.events;
    if (cfg.drop_probability > 0.0 || cfg.jitter_masks) add_detector_noise(cfg, rng, v);
    return v;
  }
  throw GenerationError("could not place objects for seed " + std::to_string(cfg.seed) + ", video " +
                        std::to_string(index) + " after " + std::to_string(kMaxAttempts) + " attempts");
}

std::vector<Video> generate(const WorldConfig& cfg, std::size_t n, std::uint64_t first, std::size_t workers) {
  std::vector<Video> out(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = generate_video(cfg, first + i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = generate_video(cfg, first + i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Label oracle_label(const WorldConfig& cfg, std::span<const Event> events) {
  Label out;
  switch (cfg.task) {
    case TaskKind::ordered_swap:
      for (const auto& e : events) {
        if (e.kind == EventKind::swap) {
          out.label = e.actor == cfg.object_classes[0] ? 0 : 1;
          return out;
        }
      }
      throw FormatError("ordered_swap event log has no swap event");
    case TaskKind::touch:
      out.multi_hot.assign(cfg.object_classes.size(), 0.0f);
      for (const auto& e : events) {
        if (e.kind == EventKind::touch) out.multi_hot[class_index(cfg, e.target)] = 1.0f;
      }
      return out;
    case TaskKind::state_change:
      for (const auto& e : events) {
        if (e.kind == EventKind::flip) {
          out.label = class_index(cfg, e.actor);
          return out;
        }
      }
      throw FormatError("state_change event log has no flip event");
    case TaskKind::appear_disappear:
      for (const auto& e : events) {
        if (e.kind == EventKind::appear || e.kind == EventKind::vanish) {
          out.label = 2 * class_index(cfg, e.actor) + (e.kind == EventKind::vanish ? 1 : 0);
          return out;
        }
      }
      throw FormatError("appear_disappear event log has no appear or vanish event");
  }
  return out;
}

std::size_t mirror_label(std::size_t label) { return label == 0 ? 1 : 0; }

Video time_reverse(const Video& video, const WorldConfig& cfg) {
  Video out = video;
  const std::size_t frames = video.frames, plane = video.height * video.width;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t f = 0; f < frames; ++f) {
      const auto* src = video.pixels.data() + (c * frames + f) * plane;
      std::copy(src, src + plane, out.pixels.data() + (c * frames + (frames - 1 - f)) * plane);
    }
  }
  std::reverse(out.annotations.begin(), out.annotations.end());
  out.events.clear();
  for (auto it = video.events.rbegin(); it != video.events.rend(); ++it) {
    Event e = *it;
    switch (e.kind) {
      case EventKind::contact:
      case EventKind::swap:
        std::swap(e.actor, e.target);
        e.frame = frames - 1 - e.frame;
        break;
      case EventKind::touch:
        e.frame = frames - 1 - e.frame;
        break;
      case EventKind::flip:
        e.frame = frames - e.frame;
        break;
      case EventKind::appear:
        e.kind = EventKind::vanish;
        e.frame = frames - e.frame;
        break;
      case EventKind::vanish:
        e.kind = EventKind::appear;
        e.frame = frames - e.frame;
        break;
    }
    out.events.push_back(e);
  }
  out.label = oracle_label(cfg, out.events);
  return out;
}

std::vector<double> class_pixel_histogram(std::span<const Video> videos, std::size_t label) {
  std::vector<double> out(kArchetypes, 0.0);
  std::size_t frames = 0;
  for (const auto& v : videos) {
    if (v.label.label != label) continue;
    for (const auto& frame : v.annotations) {
      ++frames;
      for (const auto& a : frame) out[a.class_id()] += static_cast<double>(a.mask.count());
    }
  }
  if (frames > 0) {
    for (auto& x : out) x /= static_cast<double>(frames);
  }
  return out;
}

bool masks_disjoint(const Video& video) {
  for (const auto& frame : video.annotations) {
    std::vector<std::uint8_t> seen(video.height * video.width, 0);
    for (const auto& a : frame) {
      for (std::size_t i = 0; i < seen.size(); ++i) {
        if (a.mask.pixels[i] && seen[i]) return false;
        seen[i] |= a.mask.pixels[i];
      }
    }
  }
  return true;
}

}  // namespace orn::world
