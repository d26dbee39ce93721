#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace sclab {

/// Streaming JSON emitter with deterministic, locale-independent number
/// formatting (17 significant digits). Keys are emitted in call order, so
/// identical call sequences produce byte-identical documents.
class JsonWriter {
public:
    JsonWriter& begin_object() {
        separate();
        out_ += '{';
        return *this;
    }
    JsonWriter& end_object() {
        out_ += '}';
        return *this;
    }
    JsonWriter& begin_array() {
        separate();
        out_ += '[';
        return *this;
    }
    JsonWriter& end_array() {
        out_ += ']';
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        separate();
        append_string(k);
        out_ += ':';
        return *this;
    }
    JsonWriter& string(const std::string& v) {
        separate();
        append_string(v);
        return *this;
    }
    JsonWriter& number(double v) {
        separate();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out_ += buf;
        return *this;
    }
    JsonWriter& integer(long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& boolean(bool v) {
        separate();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonWriter& number_array(const std::vector<double>& vs) {
        begin_array();
        for (double v : vs) number(v);
        end_array();
        return *this;
    }
    const std::string& str() const { return out_; }

private:
    void separate() {
        if (out_.empty()) return;
        const char last = out_.back();
        if (last != '{' && last != '[' && last != ':') out_ += ',';
    }
    void append_string(const std::string& s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                default: out_ += c;
            }
        }
        out_ += '"';
    }

    std::string out_;
};

}  // namespace sclab
