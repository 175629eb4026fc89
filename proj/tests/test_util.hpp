#pragma once

#include <cstdlib>
#include <fstream>
#include <string>
#include <unistd.h>

namespace testutil {

inline std::string temp_path(const char* suffix = ".csv") {
    std::string tmpl = "/tmp/evload_test_XXXXXX";
    int fd = mkstemp(tmpl.data());
    if (fd >= 0) close(fd);
    std::string path = tmpl + suffix;
    std::rename(tmpl.c_str(), path.c_str());
    return path;
}

inline std::string write_temp(const std::string& content, const char* suffix = ".csv") {
    std::string path = temp_path(suffix);
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace testutil
