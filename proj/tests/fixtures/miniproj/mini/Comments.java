package mini;

/* A header comment with a brace { and a "quote" */
public class Comments {
    // void fake() { }

    String mixed() {
        String a = "/* not a comment */";
        /* "not a string" } */
        String b = "// nor this";
        char q = '"';
        return a + b + q; // trailing } brace
    }

    String block() {
        String t = """
            text block with } and "quotes"
            """;
        return t;
    }

    int local() {
        class Helper {
            int twice(int v) { return 2 * v; }
        }
        return new Helper().twice(3);
    }

    /**
     * Javadoc with code: {@code foo() { }}
     */
    int après(int ü) {
        return ü;
    }
}
