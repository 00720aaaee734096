#include "tough/cache.hpp"

#include <openssl/evp.h>

#include <sstream>

#include "tough/errors.hpp"

namespace tough {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string QueryCache::key_for(std::string_view model_id, std::string_view context,
                                std::string_view question) {
  // length-prefixed so that field boundaries cannot collide
  std::string buf;
  for (auto part : {model_id, context, question}) {
    buf += std::to_string(part.size());
    buf.push_back(':');
    buf.append(part);
  }
  return sha256_hex(buf);
}

QueryCache::QueryCache(std::filesystem::path path) : path_(std::move(path)) {
  std::optional<std::size_t> torn_at;
  if (std::filesystem::exists(*path_)) {
    std::ifstream in(*path_, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string content = ss.str();
    std::size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
      auto nl = content.find('\n', pos);
      bool last_unterminated = nl == std::string::npos;
      std::string line = content.substr(pos, last_unterminated ? std::string::npos : nl - pos);
      const std::size_t line_start = pos;
      pos = last_unterminated ? content.size() : nl + 1;
      ++line_no;
      if (line.empty()) continue;
      try {
        auto j = Json::parse(line);
        auto key = j.at("key").get<std::string>();
        j.at("model_id").get<std::string>();
        if (key.size() != 64) throw std::runtime_error("bad key");
        auto answer = answer_from_json(j.at("answer"));
        values_[key] = to_json(answer).dump();
      } catch (const std::exception& e) {
        if (last_unterminated) {
          // torn append from an interrupted run
          torn_at = line_start;
          continue;
        }
        values_.clear();
        bypassed_ = true;
        warning_ = "cache file " + path_->string() + " is corrupt at line " +
                   std::to_string(line_no) + " (" + e.what() + "); cache bypassed";
        return;
      }
    }
  }
  if (torn_at) std::filesystem::resize_file(*path_, *torn_at);
  bool needs_newline = false;
  if (!torn_at && std::filesystem::exists(*path_) && std::filesystem::file_size(*path_) > 0) {
    std::ifstream tail(*path_, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    needs_newline = tail.get() != '\n';
  }
  log_.open(*path_, std::ios::binary | std::ios::app);
  if (!log_) throw Error("cannot open cache file " + path_->string() + " for appending");
  if (needs_newline) log_ << '\n' << std::flush;
}

std::optional<ModelAnswer> QueryCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return answer_from_json(Json::parse(it->second));
}

ModelAnswer QueryCache::put(const std::string& key, const std::string& model_id,
                            const ModelAnswer& answer) {
  std::lock_guard lock(mutex_);
  auto serialized = to_json(answer).dump();
  auto [it, inserted] = values_.emplace(key, serialized);
  if (!inserted) return answer_from_json(Json::parse(it->second));
  if (log_.is_open() && !bypassed_) {
    Json rec;
    rec["key"] = key;
    rec["model_id"] = model_id;
    rec["answer"] = Json::parse(serialized);
    log_ << rec.dump() << '\n' << std::flush;
  }
  return answer_from_json(Json::parse(serialized));
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mutex_);
  return values_.size();
}

CachedProvider::CachedProvider(const AnswerProvider& inner, QueryCache& cache)
    : inner_(inner), cache_(cache), model_id_(inner.model_id()) {}

ModelAnswer CachedProvider::do_answer(std::string_view context,
                                      std::string_view question) const {
  auto key = QueryCache::key_for(model_id_, context, question);
  if (auto hit = cache_.get(key)) {
    ++cache_hits_;
    return *hit;
  }
  ++provider_calls_;
  auto fresh = inner_.answer(context, question);
  return cache_.put(key, model_id_, fresh);
}

}  // namespace tough
