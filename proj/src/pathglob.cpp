#include "profci/pathglob.hpp"

#include "profci/errors.hpp"

namespace profci {

std::regex glob_to_regex(const std::string& glob) {
    std::string re;
    re.reserve(glob.size() * 2);
    size_t i = 0;
    while (i < glob.size()) {
        char c = glob[i];
        if (c == '*') {
            if (i + 1 < glob.size() && glob[i + 1] == '*') {
                // "**/" spans zero or more segments; bare "**" matches the rest
                if (i + 2 < glob.size() && glob[i + 2] == '/') {
                    re += "(?:[^/]*/)*";
                    i += 3;
                } else {
                    re += ".*";
                    i += 2;
                }
            } else {
                re += "[^/]*";
                ++i;
            }
        } else if (c == '?') {
            re += "[^/]";
            ++i;
        } else if (c == '[') {
            size_t close = glob.find(']', i + 2); // "[]" is not a valid class
            if (close == std::string::npos)
                throw pattern_invalid("unterminated character class in glob: " + glob);
            std::string cls = glob.substr(i, close - i + 1);
            if (cls.size() > 1 && cls[1] == '!') cls[1] = '^';
            re += cls;
            i = close + 1;
        } else {
            if (std::string("\\^$.|+(){}").find(c) != std::string::npos) re += '\\';
            re += c;
            ++i;
        }
    }
    try {
        return std::regex("^" + re + "$");
    } catch (const std::regex_error& e) {
        throw pattern_invalid(std::string("glob does not translate: ") + e.what());
    }
}

bool glob_match(const std::regex& pattern, const std::string& relative_path) {
    return std::regex_match(relative_path, pattern);
}

} // namespace profci
