#include "midbf/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "raw container I/O assumes a little-endian host");

namespace midbf::io {
namespace {

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

void write_csv_values(std::ofstream& f, const std::vector<double>& row) {
  char buf[40];
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
    if (i) f << ',';
    f << buf;
  }
  f << '\n';
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream f = open_in(path, false);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric CSV cell in " + path + ": " + cell);
      }
      vals.push_back(v);
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw std::runtime_error("ragged CSV rows in " + path);
    rows.push_back(std::move(vals));
  }
  return rows;
}

void write_raw_payload(const std::string& path, const char magic[8], Index rows,
                       Index cols, const double* data, std::size_t count) {
  if (rows < 0 || cols < 0 || rows > UINT32_MAX || cols > UINT32_MAX)
    throw std::runtime_error("matrix shape does not fit the raw header");
  std::ofstream f = open_out(path, true);
  std::uint32_t r = static_cast<std::uint32_t>(rows);
  std::uint32_t c = static_cast<std::uint32_t>(cols);
  f.write(magic, 8);
  f.write(reinterpret_cast<const char*>(&r), 4);
  f.write(reinterpret_cast<const char*>(&c), 4);
  f.write(reinterpret_cast<const char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw std::runtime_error("short write to " + path);
}

struct RawHeader {
  bool complex_payload = false;
  Index rows = 0, cols = 0;
};

RawHeader read_raw_header(std::ifstream& f, const std::string& path) {
  char magic[8];
  std::uint32_t r = 0, c = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&r), 4);
  f.read(reinterpret_cast<char*>(&c), 4);
  if (!f) throw std::runtime_error("truncated raw header in " + path);
  RawHeader h;
  if (std::memcmp(magic, kRawMagicReal, 8) == 0)
    h.complex_payload = false;
  else if (std::memcmp(magic, kRawMagicComplex, 8) == 0)
    h.complex_payload = true;
  else
    throw std::runtime_error("unrecognized raw magic in " + path);
  h.rows = static_cast<Index>(r);
  h.cols = static_cast<Index>(c);
  return h;
}

void read_doubles(std::ifstream& f, const std::string& path, double* out,
                  std::size_t count) {
  f.read(reinterpret_cast<char*>(out),
         static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw std::runtime_error("truncated raw payload in " + path);
}

}  // namespace

void write_csv(const std::string& path, const MatXd& A) {
  std::ofstream f = open_out(path, false);
  std::vector<double> row(A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) row[j] = A(i, j);
    write_csv_values(f, row);
  }
}

void write_csv(const std::string& path, const MatXc& A) {
  std::ofstream f = open_out(path, false);
  std::vector<double> row(2 * A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      row[2 * j] = A(i, j).real();
      row[2 * j + 1] = A(i, j).imag();
    }
    write_csv_values(f, row);
  }
}

MatXd read_csv_real(const std::string& path) {
  const auto rows = read_csv_rows(path);
  const Index nr = static_cast<Index>(rows.size());
  const Index nc = nr ? static_cast<Index>(rows.front().size()) : 0;
  MatXd A(nr, nc);
  for (Index i = 0; i < nr; ++i)
    for (Index j = 0; j < nc; ++j) A(i, j) = rows[i][j];
  return A;
}

MatXc read_csv_complex(const std::string& path) {
  const auto rows = read_csv_rows(path);
  const Index nr = static_cast<Index>(rows.size());
  const Index width = nr ? static_cast<Index>(rows.front().size()) : 0;
  if (width % 2 != 0)
    throw std::runtime_error("complex CSV needs an even column count: " + path);
  MatXc A(nr, width / 2);
  for (Index i = 0; i < nr; ++i)
    for (Index j = 0; j < A.cols(); ++j)
      A(i, j) = Cplx(rows[i][2 * j], rows[i][2 * j + 1]);
  return A;
}

void write_raw(const std::string& path, const MatXd& A) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = A;
  write_raw_payload(path, kRawMagicReal, A.rows(), A.cols(), R.data(),
                    static_cast<std::size_t>(R.size()));
}

void write_raw(const std::string& path, const MatXc& A) {
  Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = A;
  write_raw_payload(path, kRawMagicComplex, A.rows(), A.cols(),
                    reinterpret_cast<const double*>(R.data()),
                    static_cast<std::size_t>(2 * R.size()));
}

MatXd read_raw_real(const std::string& path) {
  std::ifstream f = open_in(path, true);
  const RawHeader h = read_raw_header(f, path);
  if (h.complex_payload)
    throw std::runtime_error("expected a real raw payload in " + path);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(h.rows, h.cols);
  read_doubles(f, path, R.data(), static_cast<std::size_t>(R.size()));
  return R;
}

MatXc read_raw_complex(const std::string& path) {
  std::ifstream f = open_in(path, true);
  const RawHeader h = read_raw_header(f, path);
  if (!h.complex_payload)
    throw std::runtime_error("expected a complex raw payload in " + path);
  Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(h.rows, h.cols);
  read_doubles(f, path, reinterpret_cast<double*>(R.data()),
               static_cast<std::size_t>(2 * R.size()));
  return R;
}

VecXc read_vector(const std::string& path) {
  MatXc A;
  {
    std::ifstream probe = open_in(path, true);
    char magic[8] = {0};
    probe.read(magic, 8);
    const bool raw = probe.gcount() == 8 &&
                     (std::memcmp(magic, kRawMagicReal, 8) == 0 ||
                      std::memcmp(magic, kRawMagicComplex, 8) == 0);
    if (raw) {
      std::ifstream f = open_in(path, true);
      const RawHeader h = read_raw_header(f, path);
      if (h.complex_payload) {
        Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(h.rows, h.cols);
        read_doubles(f, path, reinterpret_cast<double*>(R.data()),
                     static_cast<std::size_t>(2 * R.size()));
        A = R;
      } else {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(h.rows, h.cols);
        read_doubles(f, path, R.data(), static_cast<std::size_t>(R.size()));
        A = R.cast<Cplx>();
      }
    } else {
      const auto rows = read_csv_rows(path);
      const Index nr = static_cast<Index>(rows.size());
      const Index width = nr ? static_cast<Index>(rows.front().size()) : 0;
      if (width == 1) {  // one real value per line
        A.resize(nr, 1);
        for (Index i = 0; i < nr; ++i) A(i, 0) = Cplx(rows[i][0], 0.0);
      } else if (width % 2 == 0) {
        A.resize(nr, width / 2);
        for (Index i = 0; i < nr; ++i)
          for (Index j = 0; j < A.cols(); ++j)
            A(i, j) = Cplx(rows[i][2 * j], rows[i][2 * j + 1]);
      } else {
        throw std::runtime_error("cannot interpret CSV shape as a vector: " + path);
      }
    }
  }
  if (A.cols() == 1) return A.col(0);
  if (A.rows() == 1) return A.row(0).transpose();
  throw std::runtime_error("file does not hold a vector: " + path);
}

void write_vector(const std::string& path, const VecXc& v, bool csv) {
  const MatXc A = v;
  if (csv)
    write_csv(path, A);
  else
    write_raw(path, A);
}

}  // namespace midbf::io
