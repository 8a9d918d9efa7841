#include "kernelsmith/fft.hpp"

namespace kernelsmith {

void fft_radix2(CVector& data, bool inverse) {
  const int n = static_cast<int>(data.size());
  if (n <= 1) return;
  if ((n & (n - 1)) != 0) throw Error("fft: length must be a power of two");

  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / len;
    const Complex wlen = std::polar(1.0, ang);
    for (int i = 0; i < n; i += len) {
      Complex w{1.0, 0.0};
      for (int k = 0; k < len / 2; ++k) {
        Complex u = data[i + k];
        Complex v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) data /= static_cast<double>(n);
}

CVector fft_forward(const CVector& samples) {
  CVector out = samples;
  fft_radix2(out, false);
  return out;
}

CVector fft_inverse(const CVector& coeffs) {
  CVector out = coeffs;
  fft_radix2(out, true);
  return out;
}

CVector spectral_derivative(const CVector& samples, int order) {
  const int m = static_cast<int>(samples.size());
  CVector coeffs = fft_forward(samples);
  for (int j = 0; j < m; ++j) {
    int k = (j <= m / 2) ? j : j - m;
    if (j == m / 2) {
      coeffs[j] = 0.0;
      continue;
    }
    Complex factor = std::pow(kTwoPi * static_cast<double>(k) * kImagUnit,
                              static_cast<double>(order));
    coeffs[j] *= factor;
  }
  return fft_inverse(coeffs);
}

Complex trig_interpolate(const CVector& coeffs, double t) {
  const int m = static_cast<int>(coeffs.size());
  Complex acc{0.0, 0.0};
  for (int j = 0; j < m; ++j) {
    if (j == m / 2) {
      acc += coeffs[j] * std::cos(kPi * m * t);
      continue;
    }
    int k = (j < m / 2) ? j : j - m;
    acc += coeffs[j] * std::polar(1.0, kTwoPi * k * t);
  }
  return acc / static_cast<double>(m);
}

}  // namespace kernelsmith
