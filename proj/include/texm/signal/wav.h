#pragma once

#include <filesystem>

#include "texm/signal/audio_clip.h"

namespace texm {

enum class WavEncoding { kPcm16, kFloat32 };

// RIFF/WAVE reader for PCM-16 and IEEE float-32, mono or stereo (stereo is
// averaged to mono). Unsupported codecs raise kUnsupportedFormat, short
// files kTruncatedFile.
AudioClip load_wav(const std::filesystem::path& path);

// PCM-16 hard-clips out-of-range samples and logs a warning.
void save_wav(const AudioClip& clip, const std::filesystem::path& path,
              WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace texm
