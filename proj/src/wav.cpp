#include "cass/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "cass/errors.hpp"

namespace cass {

namespace {

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw DataError("cannot ingest '" + path + "': " + why);
}

} // namespace

Waveform read_wav_mono(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(path, "file not readable");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 44) fail(path, "truncated WAV header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(path, "not a RIFF/WAVE file");

    uint16_t audio_format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    size_t data_off = 0, data_len = 0;
    bool have_fmt = false;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        uint32_t len = read_u32(bytes.data() + pos + 4);
        size_t body = pos + 8;
        if (body + len > bytes.size()) fail(path, "truncated chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) fail(path, "short fmt chunk");
            audio_format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_off = body;
            data_len = len;
        }
        pos = body + len + (len & 1); // chunks are word-aligned
    }
    if (!have_fmt || data_off == 0) fail(path, "missing fmt or data chunk");
    if (channels != 1) fail(path, "expected single-channel audio");
    if (sample_rate == 0) fail(path, "zero sample rate");

    std::vector<double> samples;
    const uint8_t* d = bytes.data() + data_off;
    if (audio_format == 1 && bits == 16) {
        size_t n = data_len / 2;
        samples.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            int16_t s = static_cast<int16_t>(read_u16(d + 2 * i));
            samples.push_back(static_cast<double>(s) / 32768.0);
        }
    } else if (audio_format == 1 && bits == 32) {
        size_t n = data_len / 4;
        samples.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            int32_t s = static_cast<int32_t>(read_u32(d + 4 * i));
            samples.push_back(static_cast<double>(s) / 2147483648.0);
        }
    } else if (audio_format == 3 && bits == 32) {
        size_t n = data_len / 4;
        samples.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            uint32_t u = read_u32(d + 4 * i);
            float x;
            std::memcpy(&x, &u, 4);
            samples.push_back(static_cast<double>(x));
        }
    } else {
        fail(path, "unsupported WAV encoding");
    }
    if (samples.empty()) fail(path, "empty data chunk");
    return Waveform(std::move(samples), static_cast<double>(sample_rate));
}

void write_wav_mono(const std::string& path, const Waveform& w) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");

    auto put_u32 = [&](uint32_t x) {
        uint8_t b[4] = {static_cast<uint8_t>(x), static_cast<uint8_t>(x >> 8),
                        static_cast<uint8_t>(x >> 16), static_cast<uint8_t>(x >> 24)};
        f.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](uint16_t x) {
        uint8_t b[2] = {static_cast<uint8_t>(x), static_cast<uint8_t>(x >> 8)};
        f.write(reinterpret_cast<char*>(b), 2);
    };

    const uint32_t n = static_cast<uint32_t>(w.samples.size());
    const uint32_t rate = static_cast<uint32_t>(w.sample_rate);
    f.write("RIFF", 4);
    put_u32(36 + 2 * n);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(16);
    put_u16(1); // PCM
    put_u16(1); // mono
    put_u32(rate);
    put_u32(rate * 2);
    put_u16(2);
    put_u16(16);
    f.write("data", 4);
    put_u32(2 * n);
    for (double s : w.samples) {
        double c = std::min(1.0, std::max(-1.0, s));
        put_u16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32767.0))));
    }
}

} // namespace cass
