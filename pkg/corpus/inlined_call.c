int total = 0;

void add(int k) {
    total = total + k;
}

int main(void) {
    int i = 0;
    while (i < 4) {
        add(1);
        i = i + 1;
        if (total == 3) {
            total = 0;
            i = 0;
        }
    }
    return total;
}
