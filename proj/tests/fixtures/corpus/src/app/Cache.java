package app;

import java.util.HashMap;
import java.util.List;
import java.util.Map;

class Cache {
    private final Map<String, List<String>> entries = new HashMap<>();

    List<String> get(String key) {
        return entries.get(key);
    }

    void put(String key, List<String> value) {
        entries.put(key, value);
    }

    void clear() {
        entries.clear();
    }
}
