#include "sgaudit/session/store.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/png.hpp"
#include "sgaudit/common/text.hpp"
#include "internal.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

namespace sgaudit::session {
namespace fs = std::filesystem;

Clock system_clock() {
    return [] {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    };
}

Clock logical_clock() {
    auto tick = std::make_shared<std::atomic<Timestamp>>(0);
    return [tick] { return tick->fetch_add(1); };
}

std::string_view palette_color(int color_index) {
    static constexpr std::string_view kPalette[kPaletteSize] = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return kPalette[static_cast<std::size_t>(color_index) % kPaletteSize];
}

std::uint64_t DistributionRow::total() const {
    std::uint64_t t = 0;
    for (const auto& c : counts) t += c.count;
    return t;
}

const Prompt& AuditSession::prompt(const PromptId& pid) const {
    for (const auto& p : prompts) {
        if (p.id == pid) return p;
    }
    throw NotFoundError("unknown prompt " + pid.str());
}

const GeneratedImage& AuditSession::image(const ImageId& iid) const {
    auto it = images.find(iid);
    if (it == images.end()) throw NotFoundError("unknown image " + iid.str());
    return it->second;
}

const Bytes& AuditSession::blob_of(const ImageId& iid) const {
    const auto& img = image(iid);
    auto it = blobs.find(img.blob.digest);
    if (it == blobs.end()) throw IoError("blob for image " + iid.str() + " is not loaded");
    return it->second;
}

namespace {

std::string random_session_id() {
    std::random_device rd;
    std::uint64_t v = (std::uint64_t{rd()} << 32) | rd();
    std::ostringstream os;
    os << "s" << std::hex << (v & 0xffffffffULL);
    return os.str();
}

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, std::span<const std::uint8_t> bytes) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace

namespace detail {

void rebuild_catalog(AuditSession& s) {
    s.catalog = {};
    for (const auto& p : s.prompts) s.catalog.add_prompt(p.id);
    for (const auto& [id, img] : s.images) s.catalog.add_image(img.prompt_id, id);
}

}  // namespace detail

AuditSession create_session(const SessionOptions& options) {
    AuditSession s;
    s.id = SessionId(options.id.empty() ? random_session_id() : options.id);
    if (s.id.str().find_first_of("/-? #") != std::string::npos) {
        throw ValidationError("session id may not contain '/', '-', '?', '#' or spaces");
    }
    s.clock = options.clock ? options.clock : system_clock();
    s.created_at = options.created_at ? *options.created_at : s.clock();
    s.model_id = options.model_id;
    s.seed = options.seed;
    s.graph = graph::new_graph(options.first_level, s.id_prefix());
    return s;
}

std::pair<Prompt, GenerationRequest> add_prompt(AuditSession& session, const std::string& text, int n_images,
                                                PromptOrigin origin) {
    auto clean = trim(text);
    if (clean.empty()) throw ValidationError("prompt text must be non-empty");
    if (n_images < 1) throw ValidationError("number of images must be at least 1");
    Prompt p;
    std::uint64_t ordinal = ++session.counters.prompt;
    p.id = PromptId(session.id_prefix() + "p" + padded(ordinal, 3));
    p.text = clean;
    p.color_index = static_cast<int>(ordinal - 1);
    p.requested_count = n_images;
    p.origin = origin;
    p.sub_seed = hash64("sub-seed:" + std::to_string(session.seed) + ":" + std::to_string(ordinal));
    session.prompts.push_back(p);
    session.catalog.add_prompt(p.id);
    return {p, GenerationRequest{p.id, n_images, p.sub_seed}};
}

IngestResult ingest_images(AuditSession& session, const GenerationRequest& request, const std::vector<Bytes>& blobs) {
    session.prompt(request.prompt_id);
    if (blobs.empty()) throw ValidationError("no images to ingest");
    if (static_cast<int>(blobs.size()) != request.n_images) {
        throw ValidationError("expected " + std::to_string(request.n_images) + " images for prompt " +
                              request.prompt_id.str() + ", got " + std::to_string(blobs.size()));
    }
    std::vector<ImageSize> sizes;
    for (const auto& b : blobs) {
        auto size = png_dimensions(b);
        if (!size) throw ValidationError("generated image for prompt " + request.prompt_id.str() + " is not a PNG");
        sizes.push_back(*size);
    }
    IngestResult result;
    std::set<ImageId> fresh;
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        GeneratedImage img;
        img.id = ImageId(session.id_prefix() + "img" + padded(++session.counters.image, 5));
        img.prompt_id = request.prompt_id;
        img.index = static_cast<int>(i);
        img.blob.digest = sha256_hex(blobs[i]);
        img.blob.path = "images/" + img.blob.digest + ".png";
        img.width = sizes[i].width;
        img.height = sizes[i].height;
        session.blobs.try_emplace(img.blob.digest, blobs[i]);
        session.catalog.add_image(img.prompt_id, img.id);
        fresh.insert(img.id);
        result.image_ids.push_back(img.id);
        session.images.emplace(img.id, std::move(img));
    }
    result.affected_nodes = graph::extend_auto_scopes(session.graph, request.prompt_id, fresh, session.catalog);
    return result;
}

const Bookmark& bookmark_item(AuditSession& session, BookmarkTarget target, const std::string& comment) {
    if (const auto* img = std::get_if<ImageTarget>(&target)) {
        session.image(img->image_id);
    } else {
        const auto& chart = std::get<ChartTarget>(target);
        const auto& node = session.graph.node(chart.node_id);
        if (!node.is_attribute()) throw ValidationError("only attribute charts can be bookmarked");
    }
    Bookmark b;
    b.id = BookmarkId(session.id_prefix() + "bm" + padded(++session.counters.bookmark, 3));
    b.target = std::move(target);
    b.comment = comment;
    b.created_at = session.clock();
    session.bookmarks.push_back(std::move(b));
    return session.bookmarks.back();
}

void set_general_notes(AuditSession& session, std::string text) { session.general_notes = std::move(text); }

void save_session(const AuditSession& session, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "images", ec);
    if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());
    for (const auto& [id, img] : session.images) {
        auto path = dir / img.blob.path;
        if (fs::exists(path)) continue;
        auto it = session.blobs.find(img.blob.digest);
        if (it == session.blobs.end()) throw IoError("blob for image " + id.str() + " is not loaded");
        write_file(path, it->second);
    }
    auto text = canonical_state(session);
    write_file(dir / "state.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

AuditSession load_session(const fs::path& dir, Clock clock) {
    auto state = dir / "state.json";
    if (!fs::exists(state)) throw NotFoundError("no session state in " + dir.string());
    auto bytes = read_file(state);
    Json j = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) throw ValidationError("session state in " + dir.string() + " is corrupt");
    AuditSession s = session_from_json(j);
    for (const auto& [id, img] : s.images) {
        auto path = dir / img.blob.path;
        if (!fs::exists(path)) throw DigestError("missing blob file for image " + id.str());
        auto blob = read_file(path);
        if (sha256_hex(blob) != img.blob.digest) {
            throw DigestError("blob for image " + id.str() + " does not match its digest");
        }
        s.blobs.try_emplace(img.blob.digest, std::move(blob));
    }
    s.clock = clock ? clock : system_clock();
    return s;
}

std::string canonical_state(const AuditSession& session) { return to_json(session).dump(2); }

}  // namespace sgaudit::session
