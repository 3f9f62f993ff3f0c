int main(void) {
    int i = 0;
    int seen = 0;
    while (1) {
        i = i + 1;
        if (i == 3) {
            continue;
        }
        seen = seen + i;
        if (i > 6) {
            break;
        }
    }
    return seen;
}
