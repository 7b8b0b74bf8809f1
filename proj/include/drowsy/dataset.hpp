#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drowsy/eye_sample.hpp"
#include "drowsy/image.hpp"
#include "drowsy/rng.hpp"

namespace drowsy {

struct ManifestEntry {
  std::string path;
  EyeLabel label = EyeLabel::Open;
  std::string origin;
};

struct Corpus {
  std::vector<EyeSample> samples;
  std::vector<ManifestEntry> manifest;  // parallel to samples

  std::size_t count(EyeLabel label) const;
};

struct SplitSpec {
  std::vector<double> fractions;  // e.g. {0.7, 0.3} or {0.8, 0.1, 0.1}
  std::uint64_t seed = 0;

  void validate() const;
};

// equalize -> bilinear 24x24 -> pixel/255.
std::array<float, 576> preprocess_to_input(const GrayImage& img);

// Loads root/closed/*.pgm then root/open/*.pgm, filename-sorted, through the
// preprocessing chain. Unreadable files are skipped with a warning on stderr
// (and recorded in *skipped when given); a class directory that yields no
// samples is an error.
Corpus load_corpus(const std::filesystem::path& root,
                   std::vector<std::string>* skipped = nullptr,
                   const std::string& origin = "");

// Stratified, seeded split. Per class, part boundaries are
// floor(cumulative_fraction * n), so each part size is within one sample of
// its exact share and the parts partition the class.
std::vector<Corpus> split(const Corpus& corpus, const SplitSpec& spec);

struct SynthParams {
  double noise_stddev = 8.0;  // additive Gaussian pixel noise
};

// Procedurally rendered 24x24 eye glyph: open = bright sclera ellipse with a
// dark iris disk, closed = a single dark horizontal arc. Raw pixels, before
// any preprocessing.
GrayImage synth_glyph(Rng& rng, EyeLabel label, const SynthParams& params = {});

// n_per_class glyphs per class rendered from the seed and passed through the
// standard preprocessing chain; manifest origin is "synth".
Corpus synth_corpus(int n_per_class, std::uint64_t seed, const SynthParams& params = {});

// "path,label,origin" rows.
std::string manifest_csv(const Corpus& corpus);

}  // namespace drowsy
