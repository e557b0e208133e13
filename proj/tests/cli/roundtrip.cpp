// End-to-end checks of the command-line binary: every run of the same
// configuration must produce byte-identical files (including scans run
// with several worker threads), emitted CSV must round-trip through the
// reader unchanged, and the self-check subcommand must succeed.
//
// argv[1]: path to the CLI binary
// argv[2]: directory holding the example configuration files

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qmpemba/io.hpp"

namespace {

namespace fs = std::filesystem;

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "FAIL: " << what << "\n";
    } else {
        std::cout << "ok: " << what << "\n";
    }
}

int runCommand(const std::string& command) {
    const int raw = std::system(command.c_str());
    if (raw == -1) {
        return -1;
    }
#ifdef _WIN32
    return raw;
#else
    if (WIFEXITED(raw)) {
        return WEXITSTATUS(raw);
    }
    return -1;
#endif
}

std::string readFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: cli_roundtrip <binary> <config-dir>\n";
        return 2;
    }
    const std::string binary = argv[1];
    const fs::path configDir = argv[2];
    const fs::path outDir = fs::path("cli_roundtrip_out");
    fs::create_directories(outDir);

    const auto quote = [](const fs::path& p) {
        return "\"" + p.string() + "\"";
    };
    const std::string base = quote(binary);

    // Trajectory runs must be reproducible byte for byte.
    {
        const fs::path a = outDir / "evolve_a.csv";
        const fs::path b = outDir / "evolve_b.csv";
        const std::string cfg = quote(configDir / "dot_relax.ini");
        expect(runCommand(base + " evolve --config " + cfg + " --out " +
                          quote(a) + " 2> /dev/null") == 0,
               "evolve run (first) exits cleanly");
        expect(runCommand(base + " evolve --config " + cfg + " --out " +
                          quote(b) + " 2> /dev/null") == 0,
               "evolve run (second) exits cleanly");
        const std::string bytesA = readFile(a);
        expect(!bytesA.empty(), "evolve output is nonempty");
        expect(bytesA == readFile(b), "evolve reruns emit identical bytes");

        // The emitted CSV must round-trip through the reader unchanged.
        try {
            const auto table = qmpemba::io::readCsv(bytesA);
            expect(qmpemba::io::writeCsv(table) == bytesA,
                   "evolve CSV round-trips through the reader");
        } catch (const std::exception& e) {
            expect(false, std::string("evolve CSV parses: ") + e.what());
        }
    }

    // JSON output parses and reruns identically.
    {
        const fs::path a = outDir / "evolve_a.json";
        const fs::path b = outDir / "evolve_b.json";
        const std::string cfg = quote(configDir / "pair_imbalanced.ini");
        expect(runCommand(base + " evolve --config " + cfg +
                          " --format json --out " + quote(a) +
                          " 2> /dev/null") == 0,
               "json evolve run (first) exits cleanly");
        expect(runCommand(base + " evolve --config " + cfg +
                          " --format json --out " + quote(b) +
                          " 2> /dev/null") == 0,
               "json evolve run (second) exits cleanly");
        const std::string bytesA = readFile(a);
        expect(!bytesA.empty() && bytesA.front() == '{',
               "json evolve output is a json object");
        expect(bytesA == readFile(b), "json reruns emit identical bytes");
    }

    // Scans must be independent of the worker-thread count.
    {
        const fs::path one = outDir / "boundary_t1.csv";
        const fs::path four = outDir / "boundary_t4.csv";
        const std::string cfg = quote(configDir / "boundary_scan.ini");
        expect(runCommand(base + " scan --config " + cfg +
                          " --threads 1 --out " + quote(one) +
                          " 2> /dev/null") == 0,
               "boundary scan with one worker exits cleanly");
        expect(runCommand(base + " scan --config " + cfg +
                          " --threads 4 --out " + quote(four) +
                          " 2> /dev/null") == 0,
               "boundary scan with four workers exits cleanly");
        const std::string bytesOne = readFile(one);
        expect(!bytesOne.empty(), "boundary scan output is nonempty");
        expect(bytesOne == readFile(four),
               "worker count does not change scan bytes");
    }

    // Region maps likewise.
    {
        const fs::path one = outDir / "region_t1.csv";
        const fs::path three = outDir / "region_t3.csv";
        const std::string cfg = quote(configDir / "region_map.ini");
        expect(runCommand(base + " scan --config " + cfg +
                          " --threads 1 --out " + quote(one) +
                          " 2> /dev/null") == 0,
               "region scan with one worker exits cleanly");
        expect(runCommand(base + " scan --config " + cfg +
                          " --threads 3 --out " + quote(three) +
                          " 2> /dev/null") == 0,
               "region scan with three workers exits cleanly");
        const std::string bytesOne = readFile(one);
        expect(!bytesOne.empty(), "region scan output is nonempty");
        expect(bytesOne == readFile(three),
               "worker count does not change region bytes");
    }

    // The self-check subcommand must pass on its built-in defaults.
    {
        const fs::path report = outDir / "validate.txt";
        expect(runCommand(base + " validate > " + quote(report) +
                          " 2> /dev/null") == 0,
               "validate subcommand exits cleanly");
        const std::string text = readFile(report);
        expect(text.find("all checks passed") != std::string::npos,
               "validate reports success");
    }

    // Unknown configuration keys or bad precision must fail loudly.
    {
        const std::string cfg = quote(configDir / "dot_relax.ini");
        expect(runCommand(base + " evolve --config " + cfg +
                          " --precision 3 --out " +
                          quote(outDir / "bad.csv") + " 2> /dev/null") != 0,
               "out-of-range precision is rejected");
        expect(runCommand(base + " evolve --config " +
                          quote(configDir / "no_such_file.ini") +
                          " 2> /dev/null") != 0,
               "missing configuration file is rejected");
    }

    if (failures == 0) {
        std::cout << "cli_roundtrip: all checks passed\n";
        return 0;
    }
    std::cerr << "cli_roundtrip: " << failures << " check(s) failed\n";
    return 1;
}
