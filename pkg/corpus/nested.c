int main(void) {
    int i = 0;
    int j = 0;
    while (1) {
        j = 0;
        while (j < 3) {
            j = j + 1;
        }
        i = i + 1;
        if (i == 2) {
            i = 0;
        }
    }
    return 0;
}
