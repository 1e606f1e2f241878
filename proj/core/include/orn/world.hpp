#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orn/config.hpp"
#include "orn/descriptors.hpp"

// Toy videos of flat 2-D objects on a static noise background, with exact
// masks and activity labels that depend on how objects interact over time.
namespace orn::world {

inline constexpr std::size_t kArchetypes = 6;

// Events refer to objects by archetype class id. `target` is unused by the
// unary kinds (flip, appear, vanish).
//   contact(x, y)  the boxes of x and y touch
//   swap(x, y)     y moves onto positions x held earlier (x leads)
//   touch(x, y)    agent x grazes y
//   flip(x)        x changes color from this frame on
//   appear(x)      first frame showing x
//   vanish(x)      first frame without x
enum class EventKind { contact, swap, touch, flip, appear, vanish };

struct Event {
  EventKind kind = EventKind::contact;
  std::size_t frame = 0;
  std::size_t actor = 0;
  std::size_t target = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct Label {
  std::size_t label = 0;          // single-label tasks
  std::vector<float> multi_hot;   // touch task, one bit per configured class
  friend bool operator==(const Label&, const Label&) = default;
};

struct Video {
  std::uint64_t index = 0;
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // [3, T, H, W]
  std::vector<std::vector<InstanceAnnotation>> annotations;  // per frame
  Label label;
  std::vector<Event> events;

  std::uint8_t pixel(std::size_t c, std::size_t t, std::size_t r, std::size_t col) const {
    return pixels[((c * frames + t) * height + r) * width + col];
  }
  friend bool operator==(const Video&, const Video&) = default;
};

// Binary footprint of archetype `id` in a size x size box, row-major.
std::vector<std::uint8_t> archetype_mask(std::size_t id, std::size_t size);
// RGB of archetype `id`; `flipped` is the state-changed color.
std::array<std::uint8_t, 3> archetype_color(std::size_t id, bool flipped = false);

// Video `index` of the stream defined by cfg.seed. Its generator is seeded
// with mix_seed(cfg.seed, index), so videos can be produced independently.
// Throws GenerationError naming the seed and index when placement fails after
// bounded retries.
Video generate_video(const WorldConfig& cfg, std::uint64_t index);

// Videos first .. first + n - 1, spread over `workers` threads.
std::vector<Video> generate(const WorldConfig& cfg, std::size_t n, std::uint64_t first = 0, std::size_t workers = 1);

// Label recomputed from the event log alone. ordered_swap: 0 when the first
// swap is led by object_classes[0] ("a acts on b"), 1 otherwise.
Label oracle_label(const WorldConfig& cfg, std::span<const Event> events);

// ordered_swap label with the roles exchanged.
std::size_t mirror_label(std::size_t label);

// Frames, annotations and events in reverse time order; the label is
// recomputed by the oracle.
Video time_reverse(const Video& video, const WorldConfig& cfg);

// Mean foreground pixels per frame for each archetype class, over the videos
// whose single label equals `label`.
std::vector<double> class_pixel_histogram(std::span<const Video> videos, std::size_t label);

// True when no two annotations of any frame share a pixel.
bool masks_disjoint(const Video& video);

}  // namespace orn::world
