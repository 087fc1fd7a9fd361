#ifndef MSHOM_HARNESS_HPP
#define MSHOM_HARNESS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mshom {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key-value experiment configuration ("key = value" lines, '#' comments,
// comma-separated lists). Unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
    std::map<std::string, std::string> kv;

    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);

    // Canonical serialized form: sorted "key = value" lines. Parsing the echo
    // reproduces the config byte for byte.
    std::string canonical() const;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    void set(const std::string& key, const std::string& value) { kv[key] = value; }
    void set(const std::string& key, double value);
    void set(const std::string& key, int value);
};

struct Decision {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparator; // "<=", "<", ">="
    bool pass = false;
};

struct ReplicateRow {
    double eps = 0.0;
    double T = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replicate_id = 0;
    double re_c = 0.0;
    double im_c = 0.0;
    double theta_hat = 0.0;
    double std_error = 0.0;
    int boundary_flag = 0;
};

struct ExperimentReport {
    std::string experiment;
    std::map<std::string, std::string> config_echo;
    std::string config_text; // canonical form of the config actually used

    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<Decision> decisions;

    std::string curve_name; // empty when the experiment has no x/y curve
    std::vector<std::pair<double, double>> curve;
    std::vector<double> histogram_samples; // standardized errors, binned on emit

    std::vector<ReplicateRow> replicates;
    std::vector<std::pair<std::string, std::string>> attachments; // filename -> content

    std::uint64_t total_steps = 0;
    double wall_seconds = 0.0;

    bool passed() const;
    std::string to_json() const;
    std::string summary_csv() const;
};

// Validates and dispatches to the named experiment. Throws ConfigError on
// invalid configuration; threshold failures are reported, not thrown.
ExperimentReport run(const ExperimentConfig& config);

// Writes report.json / summary.csv / plot .dat files (plus per-replicate CSV
// and any attachments) according to the formats list. Returns written paths.
std::vector<std::string> emit(const ExperimentReport& report, const std::string& formats,
                              const std::string& out_dir);

extern const char* const kKnownExperiments[7]; // coeff met clt estimate tail poisson hitting

} // namespace mshom

#endif
