#include "dhs/bridge.hpp"
#include "dhs/dqn.hpp"
#include "dhs/policy.hpp"

#include <cctype>

using namespace std;

namespace dhs {
namespace {

/// "012" (one digit per entry) or "0,1,12".
vector<size_t> parse_index_list(const string &spec, const string &text) {
    vector<size_t> out;
    if (text.empty())
        throw InvalidPolicy("policy '" + spec + "' needs at least one index");
    if (text.find(',') != string::npos) {
        size_t start = 0;
        while (start <= text.size()) {
            size_t end = text.find(',', start);
            if (end == string::npos)
                end = text.size();
            string item = text.substr(start, end - start);
            if (item.empty() || !all_of(item.begin(), item.end(), [](char c) { return isdigit(c); }))
                throw InvalidPolicy("bad index '" + item + "' in policy '" + spec + "'");
            out.push_back(stoul(item));
            start = end + 1;
        }
        return out;
    }
    for (char c : text) {
        if (!isdigit(static_cast<unsigned char>(c)))
            throw InvalidPolicy("bad index '" + string(1, c) + "' in policy '" + spec + "'");
        out.push_back(static_cast<size_t>(c - '0'));
    }
    return out;
}

size_t parse_number(const string &spec, const string &text) {
    if (text.empty() || !all_of(text.begin(), text.end(), [](char c) { return isdigit(c); }))
        throw InvalidPolicy("bad number '" + text + "' in policy '" + spec + "'");
    try {
        return stoull(text);
    } catch (const exception &) {
        throw InvalidPolicy("number out of range in policy '" + spec + "'");
    }
}

}  // namespace

unique_ptr<ControlPolicy> make_policy(const string &spec) {
    if (spec == "argmin-mu")
        return make_unique<ArgminMuPolicy>();
    size_t colon = spec.find(':');
    if (colon == string::npos)
        throw InvalidPolicy("unknown policy spec '" + spec + "'");
    string kind = spec.substr(0, colon);
    string arg = spec.substr(colon + 1);
    if (kind == "single")
        return make_unique<SinglePolicy>(parse_number(spec, arg));
    if (kind == "alt") {
        vector<size_t> perm = parse_index_list(spec, arg);
        vector<size_t> sorted = perm;
        sort(sorted.begin(), sorted.end());
        for (size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] != i)
                throw InvalidPolicy("'" + spec + "' is not a permutation");
        }
        return make_unique<AlternationPolicy>(move(perm));
    }
    if (kind == "rnd")
        return make_unique<RandomPolicy>(parse_number(spec, arg));
    if (kind == "scripted")
        return make_unique<ScriptedPolicy>(parse_index_list(spec, arg));
    if (kind == "q") {
        if (arg.empty())
            throw InvalidPolicy("policy 'q:' needs a model file");
        try {
            return make_unique<QPolicy>(load_model(arg), spec);
        } catch (const runtime_error &e) {
            throw InvalidPolicy(e.what());
        }
    }
    if (kind == "remote") {
        try {
            return remote_policy(parse_endpoint(arg));
        } catch (const invalid_argument &e) {
            throw InvalidPolicy(e.what());
        }
    }
    throw InvalidPolicy("unknown policy spec '" + spec + "'");
}

}  // namespace dhs
