#include "bibcoup/catalog.hpp"

#include "bibcoup/common.hpp"
#include "bibcoup/domain.hpp"

#include <algorithm>

namespace bibcoup {

void SourceCatalog::write(const std::string& path) const {
    std::vector<std::string> sorted(domains.begin(), domains.end());
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const std::string& d : sorted) {
        out += d;
        out += '\n';
    }
    write_text_file(path, out);
}

SourceCatalog build_catalog_from_file(const std::string& path,
                                      const DomainNormalizer& normalizer) {
    SourceCatalog catalog;
    catalog.provenance = path;
    for (const std::string& raw : read_lines(path)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        ++catalog.lines_read;
        if (auto domain = normalizer.normalize(line)) {
            catalog.domains.insert(std::move(*domain));
        } else {
            ++catalog.skipped;
        }
    }
    return catalog;
}

bool classify(const std::string& domain, const SourceCatalog& catalog) {
    return catalog.contains(domain);
}

}  // namespace bibcoup
