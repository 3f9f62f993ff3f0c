int main(void) {
    int i = 0;
    while (1) {
        i = i + 1;
        if (i == 3) {
            i = 0;
        }
    }
    return 0;
}
