#include <gapblock/matrix_json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gapblock {

namespace {
constexpr const char* kModule = "matrix_json";

double finite_number(const nlohmann::json& v)
{
    if (!v.is_number()) throw Error(kModule, "numeric entries", "matrix entry is not a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(kModule, "finite entries", "matrix entry is NaN or Inf");
    return x;
}
}  // namespace

nlohmann::json matrix_to_json(const ComplexMatrix& a)
{
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back({a(i, j).real(), a(i, j).imag()});
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

ComplexMatrix matrix_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw Error(kModule, "matrix object", "expected an object with rows, cols and data");
    if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer())
        throw Error(kModule, "matrix shape", "rows and cols must be integers");
    const auto rows = j["rows"].get<long long>();
    const auto cols = j["cols"].get<long long>();
    if (rows < 0 || cols < 0) throw Error(kModule, "matrix shape", "negative dimension");
    const auto& data = j["data"];
    if (!data.is_array() || static_cast<long long>(data.size()) != rows * cols)
        throw Error(kModule, "matrix shape", "data length does not equal rows*cols");

    ComplexMatrix a(rows, cols);
    for (long long k = 0; k < rows * cols; ++k)
    {
        const auto& entry = data[static_cast<size_t>(k)];
        if (!entry.is_array() || entry.size() != 2)
            throw Error(kModule, "complex entries", "each entry must be a [re, im] pair");
        a(k / cols, k % cols) = Complex(finite_number(entry[0]), finite_number(entry[1]));
    }
    return a;
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(kModule, "readable input", "cannot open " + path);
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(kModule, "valid JSON", path + ": " + e.what());
    }
}

void write_file_atomic(const std::string& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(kModule, "writable output", "cannot open " + tmp.string());
        out << contents;
        if (!out) throw Error(kModule, "writable output", "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(kModule, "writable output", "rename to " + path + " failed: " + ec.message());
}

}  // namespace gapblock
